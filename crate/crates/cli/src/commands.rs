use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hhllab_core::complexity::crossover_table;
use hhllab_core::hhl::{result_json, run_hhl, verify_solution, ProblemFile};
use hhllab_core::linalg::ComplexVector;
use hhllab_core::noise::{linear_grid, noise_sweep, SweepMode};
use hhllab_core::{format_number, HhlProblem, HhlResult, NoiseModel, RunMode};
use serde_json::json;

use crate::report::{amplitude_table, gnuplot_script, vector_line};
use crate::{Backend, Cli, Command, Common};

const CHECK_TOL: f64 = 1e-9;

/// Runs the selected subcommand. `Ok(false)` means a verification check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    match &cli.command {
        Command::Example => example(common),
        Command::Solve { min_cosine } => solve(common, *min_cosine),
        Command::Sweep { grid, sampled } => sweep(common, grid, *sampled),
        Command::Complexity { s, k, eps, n } => complexity(common, *s, *k, *eps, n),
    }
}

macro_rules! say {
    ($c:expr, $($arg:tt)*) => {
        if !$c.quiet {
            println!($($arg)*);
        }
    };
}

fn load_noise(arg: Option<&str>, default: NoiseModel) -> Result<NoiseModel> {
    match arg {
        None => Ok(default),
        Some("ideal" | "zero") => Ok(NoiseModel::ideal()),
        Some("reference") => Ok(NoiseModel::reference_device(0.0)),
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading noise model {path}"))?;
            NoiseModel::from_json(&text).with_context(|| format!("noise model {path}"))
        }
    }
}

fn load_problem(path: &Path) -> Result<HhlProblem> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading problem {}", path.display()))?;
    let file =
        ProblemFile::from_json(&text).with_context(|| format!("problem {}", path.display()))?;
    file.preprocess()
        .with_context(|| format!("problem {}", path.display()))
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn sampled_mode(c: &Common) -> Result<RunMode> {
    Ok(match c.backend {
        Backend::Statevector => RunMode::Shots {
            shots: c.shots,
            seed: c.seed,
        },
        Backend::Density => RunMode::Noisy {
            model: load_noise(c.noise.as_deref(), NoiseModel::ideal())?,
            shots: Some(c.shots),
            seed: c.seed,
        },
    })
}

fn print_distribution(c: &Common, r: &HhlResult) {
    for (label, p) in r.outcome_labels().iter().zip(&r.outcome_probabilities) {
        say!(c, "  P({label}) = {}", format_number(*p));
    }
}

fn example(c: &Common) -> Result<bool> {
    let p = HhlProblem::worked_example();
    say!(c, "A = [[3/2, 1/2], [1/2, 3/2]], b = (0, 1)");
    say!(
        c,
        "n_clock = {}, t = {}, C = {}, eigenvalues {:?}",
        p.n_clock,
        format_number(p.t),
        format_number(p.c),
        p.eigen
            .values
            .iter()
            .map(|&l| format_number(l))
            .collect::<Vec<_>>()
    );

    let exact = run_hhl(&p, &RunMode::Statevector)?;
    if let Some(snaps) = &exact.snapshots {
        for (label, s) in snaps.iter() {
            say!(c, "\n{label}:\n{}", amplitude_table(&p, s));
        }
    }
    let v = verify_solution(&p, &exact)?;

    let target = ComplexVector::from_real(&[-1.0, 3.0])
        .normalized()
        .expect("nonzero");
    let fidelity = exact.direction.inner(&target).norm_sqr();
    let ratio = exact.ratio_11_01.unwrap_or(f64::NAN);
    let residual = v.residual.unwrap_or(f64::NAN);
    let checks = [
        ("amplitudes", 1.0 - fidelity <= CHECK_TOL),
        ("ratio", (ratio - 9.0).abs() <= CHECK_TOL),
        ("residual", residual <= CHECK_TOL),
    ];

    let sampled = run_hhl(&p, &sampled_mode(c)?)?;
    let hist = sampled
        .histogram
        .as_ref()
        .expect("sampled runs carry a histogram");

    say!(
        c,
        "\nsuccess probability {}",
        format_number(exact.success_probability)
    );
    say!(c, "direction {}", vector_line(&exact.direction));
    if let Some(x) = &exact.rescaled_solution {
        say!(c, "rescaled solution {}", vector_line(x));
    }
    say!(
        c,
        "classical solution {}",
        vector_line(&v.classical_solution)
    );
    say!(c, "residual {}", format_number(residual));
    say!(c, "P(11)/P(01) = {}", format_number(ratio));
    say!(
        c,
        "{} shots (seed {}, {}): count(11)/count(01) = {}/{} = {}",
        hist.shots,
        hist.seed,
        sampled.mode,
        hist.count("11"),
        hist.count("01"),
        sampled
            .ratio_11_01
            .map_or("undefined".into(), format_number)
    );
    if c.backend == Backend::Density {
        let dev = sampled
            .outcome_probabilities
            .iter()
            .zip(&exact.outcome_probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        say!(
            c,
            "density-matrix distribution (max deviation from ideal {}):",
            format_number(dev)
        );
        print_distribution(c, &sampled);
    }
    for (name, ok) in checks {
        say!(c, "check {name}: {}", if ok { "ok" } else { "FAILED" });
    }

    let mut doc = result_json(&p, &exact, Some(&v));
    doc["sampled"] = result_json(&p, &sampled, None);
    doc["checks"] = checks
        .iter()
        .map(|(n, ok)| (n.to_string(), json!(ok)))
        .collect();
    let dir = c.out_dir();
    write_out(
        &dir,
        "example_result.json",
        &serde_json::to_string_pretty(&doc)?,
    )?;
    write_out(&dir, "example_histogram.csv", &hist.to_csv())?;
    say!(c, "wrote {}", dir.display());

    let all = checks.iter().all(|(_, ok)| *ok);
    if !all {
        eprintln!("worked-example checks failed");
    }
    Ok(all)
}

fn solve(c: &Common, min_cosine: f64) -> Result<bool> {
    let Some(path) = &c.problem else {
        bail!("solve needs --problem <path>");
    };
    let p = load_problem(path)?;
    if p.approximate {
        eprintln!(
            "warning: eigenvalues have no common clock unit; using an approximate {}-qubit clock",
            p.n_clock
        );
    }
    let r = match c.backend {
        Backend::Statevector => run_hhl(&p, &RunMode::Statevector)?,
        Backend::Density => run_hhl(&p, &sampled_mode(c)?)?,
    };
    let v = verify_solution(&p, &r)?;
    let sampled = match c.backend {
        Backend::Statevector => Some(run_hhl(&p, &sampled_mode(c)?)?),
        Backend::Density => None,
    };

    say!(
        c,
        "n_clock = {}, t = {}, C = {}{}",
        p.n_clock,
        format_number(p.t),
        format_number(p.c),
        if p.source.embedded {
            ", Hermitian embedding"
        } else {
            ""
        }
    );
    say!(
        c,
        "success probability {}",
        format_number(r.success_probability)
    );
    say!(c, "direction {}", vector_line(&r.direction));
    if let Some(x) = &r.rescaled_solution {
        say!(c, "rescaled solution {}", vector_line(x));
    }
    say!(
        c,
        "classical solution {}",
        vector_line(&v.classical_solution)
    );
    if let Some(res) = v.residual {
        say!(c, "residual {}", format_number(res));
    }
    say!(
        c,
        "cosine similarity {}",
        format_number(v.cosine_similarity)
    );
    print_distribution(c, &r);

    let mut doc = result_json(&p, &r, Some(&v));
    let dir = c.out_dir();
    let hist = sampled
        .as_ref()
        .map_or(r.histogram.as_ref(), |s| s.histogram.as_ref());
    if let Some(s) = &sampled {
        doc["sampled"] = result_json(&p, s, None);
    }
    write_out(&dir, "result.json", &serde_json::to_string_pretty(&doc)?)?;
    if let Some(h) = hist {
        write_out(&dir, "histogram.csv", &h.to_csv())?;
    }
    say!(c, "wrote {}", dir.display());

    let ok = v.cosine_similarity >= min_cosine;
    if !ok {
        eprintln!(
            "verification failed: cosine similarity {} < {}",
            format_number(v.cosine_similarity),
            format_number(min_cosine)
        );
    }
    Ok(ok)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums = parts
        .iter()
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("grid {spec:?}"))?;
    match nums[..] {
        [x] => Ok(vec![x]),
        [a, b, step] => Ok(linear_grid(a, b, step)?),
        _ => bail!("grid {spec:?} is not start:stop:step"),
    }
}

fn sweep(c: &Common, grid: &str, sampled: bool) -> Result<bool> {
    let grid = parse_grid(grid)?;
    let base = load_noise(c.noise.as_deref(), NoiseModel::reference_device(0.0))?;
    let p = match &c.problem {
        Some(path) => load_problem(path)?,
        None => HhlProblem::worked_example(),
    };
    let shots = sampled.then_some(c.shots);
    let result = noise_sweep(
        &p,
        &grid,
        &[SweepMode::TwoQOnly, SweepMode::Full],
        &base,
        shots,
        c.seed,
    )?;
    let csv = result.to_csv();
    say!(c, "{}", csv.trim_end());
    let dir = c.out_dir();
    write_out(&dir, "sweep.csv", &csv)?;
    write_out(&dir, "sweep.gp", &gnuplot_script(&result, "sweep.csv"))?;
    let worst_trace = result
        .rows
        .iter()
        .map(|r| r.max_trace_error)
        .fold(0.0, f64::max);
    say!(
        c,
        "max trace drift {}; wrote {}",
        format_number(worst_trace),
        dir.display()
    );
    Ok(true)
}

fn complexity(c: &Common, s: u64, k: f64, eps: f64, n: &[u64]) -> Result<bool> {
    let grid: Vec<u64> = if n.is_empty() {
        (4..=20).map(|e| 1u64 << e).collect()
    } else {
        n.to_vec()
    };
    let table = crossover_table(s, k, eps, &grid)?;
    let csv = table.to_csv();
    say!(c, "{}", csv.trim_end());
    let dir = c.out_dir();
    write_out(&dir, "complexity.csv", &csv)?;
    Ok(true)
}
