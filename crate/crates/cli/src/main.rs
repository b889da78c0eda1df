use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qwg::graph::merged_limit_spectrum;
use qwg::lab::{
    check_smallness, convergence_sweep, fit_rate, run_loaded, spectrum_csv, Overrides, Scenario, ScenarioKind,
    ShiftMode, Verdict, CSV_HEADER,
};

#[derive(Parser)]
#[command(
    name = "qwg",
    version,
    about = "Spectra of thin branched wave guides against their graph limit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenvalues of the decoupled 1D limit operator.
    LimitSpectrum(Common),
    /// One 2D solve at a single ε.
    Solve2d {
        #[command(flatten)]
        common: Common,
        /// ε to solve at; defaults to the smallest value of the scenario.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Full convergence sweep; writes `<name>.csv` and `<name>.json`.
    Sweep(Common),
    /// Mixed Dirichlet–Neumann eigenvalue of every vertex shape against π²/4.
    CheckSmallness(Common),
    /// Closed form, trial quotient and computed λ₁ for the right-angle star.
    Counterexample(Common),
    /// Refit convergence rates from a sweep CSV.
    Rates {
        /// CSV written by `sweep`.
        csv: PathBuf,
    },
    /// Fast built-in oracle checks.
    Selftest,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    shift: Option<Shift>,
    /// Mesh width factor: h = factor · ε.
    #[arg(long = "h-rule")]
    h_rule: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shift {
    Exact,
    Mesh,
}

impl Common {
    fn load(&self) -> Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)?;
        Overrides {
            seed: self.seed,
            shift: self.shift.map(|m| match m {
                Shift::Exact => ShiftMode::Exact,
                Shift::Mesh => ShiftMode::Mesh,
            }),
            h_factor: self.h_rule,
        }
        .apply(&mut s);
        s.validate()?;
        Ok(s)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::LimitSpectrum(c) => {
            let s = c.load()?;
            let g = s.build_graph()?;
            let spec = merged_limit_spectrum(&g, s.limit.grid, s.k)?;
            println!("k,lambda_limit,edge,mode");
            for (i, e) in spec.entries.iter().enumerate() {
                println!("{},{},{},{}", i + 1, e.value, e.edge, e.index);
            }
        }
        Command::Solve2d { common, eps } => {
            let mut s = common.load()?;
            let eps = eps.unwrap_or(*s.eps.last().expect("validated"));
            s.eps = vec![eps];
            s.mesh.richardson = false;
            let r = convergence_sweep(&s)?;
            if let Some(err) = r.solves.iter().find_map(|i| i.error.clone()) {
                bail!("solve at eps = {eps} failed: {err}");
            }
            print!("{}", spectrum_csv(&r));
        }
        Command::Sweep(c) | Command::Counterexample(c) => {
            let s = c.load()?;
            return report(&s, &c.out);
        }
        Command::CheckSmallness(c) => {
            let s = c.load()?;
            let g = s.build_graph()?;
            let shapes = s.build_shapes(&g)?;
            if shapes.is_empty() {
                bail!("scenario has no vertex shapes");
            }
            println!("vertex,lambda_dn_coarse,lambda_dn_fine,threshold,margin,verdict");
            let mut all = true;
            for (v, shape) in &shapes {
                let r = check_smallness(shape, s.mesh.shape_h)?;
                all &= r.verdict == Verdict::Satisfied;
                println!(
                    "{v},{},{},{},{},{:?}",
                    r.lambda_coarse, r.lambda_fine, r.threshold, r.margin, r.verdict
                );
            }
            if !all {
                eprintln!("warning: smallness condition not satisfied at every vertex");
            }
        }
        Command::Rates { csv } => rates(&csv)?,
        Command::Selftest => return selftest(),
    }
    Ok(ExitCode::SUCCESS)
}

fn report(s: &Scenario, out: &Path) -> Result<ExitCode> {
    let o = run_loaded(s, out)?;
    println!("{}", o.csv.display());
    println!("{}", o.json.display());
    if s.kind == ScenarioKind::Sweep && o.incomplete {
        eprintln!("warning: some eps points failed or did not converge; see the JSON report");
    }
    Ok(ExitCode::SUCCESS)
}

fn rates(path: &Path) -> Result<()> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| path.display().to_string())?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        bail!("{}: not a sweep CSV (header mismatch)", path.display());
    }
    let mut by_k: std::collections::BTreeMap<usize, Vec<(f64, f64)>> = Default::default();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).with_context(|| format!("row {}: missing column {i}", n + 1));
        let eps: f64 = field(0)?.parse().with_context(|| format!("row {}: eps", n + 1))?;
        let k: usize = field(1)?.parse().with_context(|| format!("row {}: k", n + 1))?;
        let gap: f64 = field(5)?.parse().with_context(|| format!("row {}: gap", n + 1))?;
        by_k.entry(k).or_default().push((eps, gap));
    }
    println!("k,rate");
    for (k, pts) in by_k {
        match fit_rate(&pts) {
            Ok(r) => println!("{k},{r}"),
            Err(e) => println!("{k},NaN # {e}"),
        }
    }
    Ok(())
}

fn selftest() -> Result<ExitCode> {
    use qwg::eigen::lowest_eigenpairs;
    use qwg::fem::{assemble_mixed_dn, assemble_tube};
    use qwg::geometry::{counterexample_gap_factor, make_vertex_shape};
    use qwg::lab::transversal_gap_check;
    use std::f64::consts::PI;

    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    let eps = 0.1;
    let pair = assemble_tube(1.0, qwg::graph::CurvatureProfile::Zero, eps, 1.0 / 16.0)?;
    let l = lowest_eigenpairs(&pair, 1, 1e-10, 0)?.values[0];
    let exact = PI * PI + PI * PI / (4.0 * eps * eps);
    check("rectangle", (l / exact - 1.0).abs() < 2e-3, format!("{l} vs {exact}"));

    let s = make_vertex_shape(&[[1.0, 0.0], [-1.0, 0.0]], 0.0, 1.5)?;
    let (_, pair) = assemble_mixed_dn(&s, 1.0 / 16.0)?;
    let l = lowest_eigenpairs(&pair, 1, 1e-10, 0)?.values[0];
    check("mixed strip", (l / (PI * PI / 4.0) - 1.0).abs() < 5e-3, format!("{l}"));

    let worst = transversal_gap_check(100, 40, 1)?;
    check(
        "transversal estimate",
        worst <= 1e-10,
        format!("max violation {worst:e}"),
    );

    let g = counterexample_gap_factor(PI / 2.0, 3.0)?;
    check("gap factor sign", g < 0.0, format!("G(pi/2, 3) = {g}"));

    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
