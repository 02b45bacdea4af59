//! `permstab`: batch driver for defects, repair, testers, oracles and the
//! counterexample generators.
//!
//! Exit status: 0 on success, 1 on bad input or usage, 2 when a guaranteed
//! bound fails.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permstab::counterexamples::{
    drop_point, gamma0_image, gamma0_word, gk_defect_sample, random_word,
};
use permstab::io::{
    format_rational, load_correction, parse_rational, read_map, save_correction, write_defects,
    write_map, write_report, write_word_list,
};
use permstab::map::{defects, is_homomorphism, symmetrize_with_report};
use permstab::oracle::{default_budget, intertwiner_min_distance, nearest_homomorphism};
use permstab::perm::all_permutations;
use permstab::testers::{
    amplified_test, blr_amplified_test, blr_rejection_exact, blr_test_once, confidence_radius,
    monte_carlo, rejection_probability_exact, sym_test_once, GroupTableMap,
};
use permstab::{
    correct, correct_via_quotient, Error, FiniteGroup, GroupMap, Permutation, Rational, Subgroup,
};

#[derive(Parser, Debug)]
#[command(
    name = "permstab",
    version,
    about = "Approximate permutation actions of finite groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write groups, maps and counterexample instances.
    #[command(subcommand)]
    Gen(Gen),
    /// Uniform and mean local defect of a map file.
    Defect(InOut),
    /// Symmetrize a map, printing the measured bounds on stderr.
    Symmetrize(InOut),
    /// Repair a map into an exact action; writes report, map and embedding into a directory.
    Correct(CorrectArgs),
    /// Repair through the quotient by a normal subgroup.
    CorrectQuotient(QuotientArgs),
    /// Run a tester once, amplified (`--eps`) or as a Monte Carlo estimate (`--samples`).
    Test(TestArgs),
    /// Brute-force reference computations.
    #[command(subcommand)]
    Oracle(Oracle),
    /// Run the full invariant suite on every `*.map` file in a directory.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct InOut {
    /// Map file.
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorrectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct QuotientArgs {
    #[arg(long)]
    input: PathBuf,
    /// Elements of the normal subgroup, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    subgroup: Vec<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// The triple test on a map into Sym(n).
    Sym,
    /// The pair test, reading Sym(n) as a group table.
    Blr,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    #[arg(long)]
    seed: u64,
    #[arg(long, conflicts_with_all = ["eps", "alpha"])]
    samples: Option<u64>,
    /// Distance parameter of the amplified test, as p/q or an integer.
    #[arg(long, value_parser = rational_arg, requires = "alpha")]
    eps: Option<Rational>,
    /// Acceptance error of the amplified test.
    #[arg(long, value_parser = rational_arg, requires = "eps")]
    alpha: Option<Rational>,
    /// Write per-batch `batch,samples,rejections` rows to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Oracle {
    /// Nearest homomorphism into Sym(N), n <= N <= n-max, by exhaustive search.
    Nearest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n_max: usize,
        /// Search budget; defaults to PERMSTAB_BUDGET or 10^7.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Distance from the padded inclusion to the intertwiners of h (degree n-1) and f (degree n).
    Intertwiner {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        f: PathBuf,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    dir: PathBuf,
}

#[derive(Clone, Debug)]
enum GroupSpec {
    Cyclic(usize),
    Symmetric(usize),
    File(PathBuf),
}

impl GroupSpec {
    fn build(&self) -> permstab::Result<FiniteGroup> {
        match self {
            GroupSpec::Cyclic(m) if *m >= 1 => Ok(FiniteGroup::cyclic(*m)),
            GroupSpec::Symmetric(k) if *k <= 6 => Ok(FiniteGroup::symmetric(*k)),
            GroupSpec::File(p) => permstab::io::read_group(p),
            other => Err(Error::InvalidArgument(format!(
                "unsupported group {other:?}"
            ))),
        }
    }
}

fn group_arg(s: &str) -> Result<GroupSpec, String> {
    let num = |t: &str| {
        t.parse::<usize>()
            .map_err(|e| format!("bad size {t:?}: {e}"))
    };
    match s.split_once(':') {
        Some(("cyclic", m)) => Ok(GroupSpec::Cyclic(num(m)?)),
        Some(("symmetric", k)) => Ok(GroupSpec::Symmetric(num(k)?)),
        Some(("file", p)) => Ok(GroupSpec::File(PathBuf::from(p))),
        _ => Err(format!(
            "expected cyclic:M, symmetric:K or file:PATH, got {s:?}"
        )),
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    if s.contains('/') {
        parse_rational(s)
    } else {
        s.parse::<i128>()
            .map(Rational::from_integer)
            .map_err(|e| format!("bad rational {s:?}: {e}"))
    }
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// The shift action of Z/n on n points.
    Shift {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Left-regular action of a group given as cyclic:M, symmetric:K or file:PATH.
    Regular {
        #[arg(long, value_parser = group_arg)]
        group: GroupSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The multiplication table of a group.
    Group {
        #[arg(long, value_parser = group_arg)]
        group: GroupSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The shift of Z/n pushed down to n-1 points.
    DropPoint {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A map file with random transpositions applied to random images.
    Perturb {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        swaps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random reduced words in x1, x2 with exponents in (-k, k).
    Words {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst sampled pair defect of the grid maps g_k.
    GkDefect {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        seed: u64,
    },
    /// The word gamma_0 and the distance of its grid image to the identity.
    Gamma0 {
        #[arg(long)]
        k: u32,
    },
}

fn emit(out: Option<&Path>, text: &str) -> permstab::Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_gen(cmd: Gen) -> permstab::Result<()> {
    match cmd {
        Gen::Shift { n, out } => {
            if n == 0 {
                return Err(Error::InvalidArgument("n must be positive".into()));
            }
            emit(
                out.as_deref(),
                &write_map(&GroupMap::regular(Arc::new(FiniteGroup::cyclic(n)))),
            )
        }
        Gen::Regular { group, out } => emit(
            out.as_deref(),
            &write_map(&GroupMap::regular(Arc::new(group.build()?))),
        ),
        Gen::Group { group, out } => {
            emit(out.as_deref(), &permstab::io::write_group(&group.build()?))
        }
        Gen::DropPoint { n, out } => {
            if n < 2 {
                return Err(Error::InvalidArgument("n must be at least 2".into()));
            }
            let f = drop_point(&GroupMap::regular(Arc::new(FiniteGroup::cyclic(n))))?;
            emit(out.as_deref(), &write_map(&f))
        }
        Gen::Perturb {
            input,
            swaps,
            seed,
            out,
        } => {
            let mut f = read_map(&input)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..swaps {
                let g = rng.gen_range(0..f.group().order());
                let mut img = f.image(g).images().to_vec();
                let n = img.len();
                img.swap(rng.gen_range(0..n), rng.gen_range(0..n));
                f = f.with_image(g, Permutation::from_images(img)?)?;
            }
            emit(out.as_deref(), &write_map(&f))
        }
        Gen::Words {
            k,
            count,
            max_len,
            seed,
            out,
        } => {
            check_k(k)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let words: Vec<_> = (0..count)
                .map(|_| random_word(k, max_len, &mut rng))
                .collect();
            emit(out.as_deref(), &write_word_list(&words))
        }
        Gen::GkDefect {
            k,
            trials,
            max_len,
            seed,
        } => {
            check_k(k)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let worst = gk_defect_sample(k, max_len, trials, &mut rng)?;
            println!(
                "k {k}\ntrials {trials}\nworst_defect {}\nbound {}",
                format_rational(worst),
                format_rational(Rational::new(2, i128::from(k)))
            );
            Ok(())
        }
        Gen::Gamma0 { k } => {
            check_k(k)?;
            let (_, d) = gamma0_image(k);
            println!(
                "word {}\ndistance_to_id {}",
                gamma0_word(k),
                format_rational(d)
            );
            Ok(())
        }
    }
}

fn check_k(k: u32) -> permstab::Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    Ok(())
}

fn correction_summary(r: &permstab::CorrectionResult) -> String {
    let rep = &r.report;
    let mut s = String::new();
    writeln!(s, "n {}", rep.n).unwrap();
    writeln!(s, "N {}", rep.big_n).unwrap();
    writeln!(s, "defect_inf {}", format_rational(rep.delta_inf)).unwrap();
    writeln!(s, "defect_mean {}", format_rational(rep.delta_mean)).unwrap();
    writeln!(s, "dist_inf {}", format_rational(rep.dist_inf)).unwrap();
    writeln!(s, "dist_mean {}", format_rational(rep.dist_mean)).unwrap();
    writeln!(s, "trivial_fallback {}", rep.used_trivial_fallback).unwrap();
    writeln!(s, "checks {}", rep.checks.len()).unwrap();
    s
}

/// `Sym(n)` as a group table together with the index of each image of `f`.
fn as_group_table(f: &GroupMap) -> permstab::Result<GroupTableMap> {
    let n = f.degree();
    if n > 6 {
        return Err(Error::InvalidArgument(format!(
            "the pair test tabulates Sym({n}); degree at most 6 is supported"
        )));
    }
    let elements = all_permutations(n);
    let images = f
        .table()
        .iter()
        .map(|p| {
            elements
                .binary_search(p)
                .expect("every permutation is listed")
        })
        .collect();
    GroupTableMap::new(
        Arc::clone(f.group()),
        Arc::new(FiniteGroup::symmetric(n)),
        images,
    )
}

fn run_test(args: TestArgs) -> permstab::Result<()> {
    let f = read_map(&args.input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = String::new();
    let name = match args.algorithm {
        Algorithm::Sym => "sym",
        Algorithm::Blr => "blr",
    };
    writeln!(out, "algorithm {name}").unwrap();
    writeln!(out, "seed {}", args.seed).unwrap();
    let table = match args.algorithm {
        Algorithm::Blr => Some(as_group_table(&f)?),
        Algorithm::Sym => None,
    };
    let exact = match &table {
        Some(t) => blr_rejection_exact(t),
        None => rejection_probability_exact(&f),
    };
    let mut batches = Vec::new();
    if let Some(samples) = args.samples {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        let (rejections, estimate, radius) = match &table {
            None => {
                let stats = monte_carlo(&f, samples, &mut rng)?;
                batches = stats.batches.clone();
                (stats.rejections, stats.estimate, stats.confidence_radius)
            }
            Some(t) => {
                let rejections = (0..samples)
                    .filter(|_| !blr_test_once(t, &mut rng).accepted)
                    .count() as u64;
                batches.push((samples, rejections));
                let estimate = rejections as f64 / samples as f64;
                (rejections, estimate, confidence_radius(estimate, samples))
            }
        };
        writeln!(out, "mode monte-carlo").unwrap();
        writeln!(out, "samples {samples}").unwrap();
        writeln!(out, "rejections {rejections}").unwrap();
        writeln!(out, "estimate {estimate}").unwrap();
        writeln!(out, "radius {radius}").unwrap();
    } else if let (Some(eps), Some(alpha)) = (args.eps, args.alpha) {
        let (accepted, rounds) = match &table {
            None => amplified_test(&f, eps, alpha, None, &mut rng)?,
            Some(t) => blr_amplified_test(t, eps, alpha, &mut rng)?,
        };
        writeln!(out, "mode amplified").unwrap();
        writeln!(out, "eps {}", format_rational(eps)).unwrap();
        writeln!(out, "alpha {}", format_rational(alpha)).unwrap();
        writeln!(out, "rounds {rounds}").unwrap();
        writeln!(out, "accepted {accepted}").unwrap();
    } else {
        let outcome = match &table {
            None => sym_test_once(&f, &mut rng),
            Some(t) => blr_test_once(t, &mut rng),
        };
        writeln!(out, "mode once").unwrap();
        writeln!(out, "accepted {}", outcome.accepted).unwrap();
        writeln!(out, "witness {:?}", outcome.witness).unwrap();
    }
    writeln!(out, "exact_rejection {}", format_rational(exact)).unwrap();
    print!("{out}");
    if let Some(path) = args.csv {
        let mut csv = String::from("batch,samples,rejections\n");
        for (i, (s, r)) in batches.iter().enumerate() {
            writeln!(csv, "{i},{s},{r}").unwrap();
        }
        fs::write(path, csv)?;
    }
    Ok(())
}

fn run_oracle(cmd: Oracle) -> permstab::Result<()> {
    match cmd {
        Oracle::Nearest {
            input,
            n_max,
            budget,
        } => {
            let f = read_map(&input)?;
            let r = nearest_homomorphism(&f, n_max, budget.unwrap_or_else(default_budget))?;
            println!("N {}", r.n_used);
            println!("d_inf {}", format_rational(r.d_inf));
            println!("d_mean {}", format_rational(r.d_mean));
            println!("min_mean {}", format_rational(r.min_mean));
            println!("candidates {}", r.candidates);
            print!("{}", write_map(&r.h));
        }
        Oracle::Intertwiner { h, f } => {
            let r = intertwiner_min_distance(&read_map(&h)?, &read_map(&f)?)?;
            println!("n {}", r.n);
            println!("distance {}", r.distance);
            println!("bound {}", r.bound);
            println!("idempotence_error {}", r.idempotence_error);
            println!("commutation_error {}", r.commutation_error);
        }
    }
    Ok(())
}

/// Corrects one instance and checks that every written file parses back.
fn verify_one(path: &Path) -> permstab::Result<String> {
    let f = read_map(path)?;
    if permstab::io::parse_map(&write_map(&f), None)? != f {
        return Err(Error::invariant(
            "map file round trip",
            path.display().to_string(),
        ));
    }
    let d = defects(&f);
    let r = correct(&f)?;
    if !is_homomorphism(&r.h) {
        return Err(Error::invariant(
            "corrected map is a homomorphism",
            path.display().to_string(),
        ));
    }
    if let Some(c) = r.report.failures().next() {
        return Err(Error::invariant(c.label.clone(), write_report(&r.report)));
    }
    let scratch = std::env::temp_dir().join(format!("permstab-verify-{}", std::process::id()));
    fs::create_dir_all(&scratch)?;
    save_correction(&scratch, &r)?;
    let back = load_correction(&scratch);
    let _ = fs::remove_dir_all(&scratch);
    let back = back?;
    if back.h != r.h || back.report != r.report || back.embedding != r.embedding {
        return Err(Error::invariant(
            "correction files round trip",
            path.display().to_string(),
        ));
    }
    Ok(format!(
        "ok {} defect_inf={} N={} dist_inf={} checks={}",
        path.display(),
        format_rational(d.defect_inf),
        r.report.big_n,
        format_rational(r.report.dist_inf),
        r.report.checks.len()
    ))
}

fn run_verify(args: VerifyArgs) -> permstab::Result<bool> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "map"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no .map files in {}",
            args.dir.display()
        )));
    }
    let mut invariant_failure = None;
    let mut domain_failure = None;
    for path in &files {
        match verify_one(path) {
            Ok(line) => println!("{line}"),
            Err(e) => {
                println!(
                    "fail {} {}",
                    path.display(),
                    e.to_string().lines().next().unwrap_or_default()
                );
                if e.is_invariant_failure() {
                    invariant_failure.get_or_insert(e);
                } else {
                    domain_failure.get_or_insert(e);
                }
            }
        }
    }
    if let Some(e) = invariant_failure {
        return Err(e);
    }
    if let Some(e) = domain_failure {
        return Err(e);
    }
    Ok(true)
}

fn run(cli: Cli) -> permstab::Result<()> {
    match cli.command {
        Command::Gen(g) => run_gen(g),
        Command::Defect(io) => emit(
            io.out.as_deref(),
            &write_defects(&defects(&read_map(&io.input)?)),
        ),
        Command::Symmetrize(io) => {
            let (g, report) = symmetrize_with_report(&read_map(&io.input)?)?;
            for (measured, bound, label) in report.bounds() {
                eprintln!(
                    "{label}: {} <= {}",
                    format_rational(measured),
                    format_rational(bound)
                );
            }
            emit(io.out.as_deref(), &write_map(&g))
        }
        Command::Correct(a) => {
            let r = correct(&read_map(&a.input)?)?;
            fs::create_dir_all(&a.out_dir)?;
            save_correction(&a.out_dir, &r)?;
            print!("{}", correction_summary(&r));
            Ok(())
        }
        Command::CorrectQuotient(a) => {
            let f = read_map(&a.input)?;
            let d = Subgroup::new(Arc::clone(f.group()), a.subgroup)?;
            let r = correct_via_quotient(&f, &d)?;
            fs::create_dir_all(&a.out_dir)?;
            save_correction(&a.out_dir, &r)?;
            print!("{}", correction_summary(&r));
            if let Some(dq) = r.report.delta_quotient {
                println!("delta_quotient {}", format_rational(dq));
            }
            Ok(())
        }
        Command::Test(a) => run_test(a),
        Command::Oracle(o) => run_oracle(o),
        Command::Verify(v) => run_verify(v).map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_invariant_failure() { 2 } else { 1 })
        }
    }
}
