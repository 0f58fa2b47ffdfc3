use std::io::Write;
use std::path::Path;

use modcs_core::dynamic::{generate_sequence, SequenceModel};
use modcs_core::harness::{
    exact_recon_probability, noisy_nrmse, regmodcs_sweep, run_dynamic, DynamicRunConfig,
    ExperimentConfig, ExperimentReport,
};
use modcs_core::io::{load_indices, load_matrix, load_vector, write_matrix, write_vector};
use modcs_core::operators::gaussian_matrix;
use modcs_core::rip::{
    check_all_modcs, check_cs_conditions, max_sparsity_fraction, rho_curve, BoundRule,
    ConditionReport, ConstantMode, RequiredConstants, RipTable, SupportSizes,
};
use modcs_core::rng::{stream, Purpose};
use modcs_core::solvers::{solve_modcs, solve_regmodcs, SolverConfig, SolverStatus};
use modcs_core::supports::{random_support, IndexSet};
use nalgebra::DVector;
use serde::Serialize;

use crate::output::{read_json, sink, write_json, CliError, CliResult};
use crate::{BoundsArgs, Cli, Command, ConditionsArgs, Format, GenCommand, RipArgs, SolveArgs};

fn with_path<T>(path: &Path, r: modcs_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut w = sink(cli.out.as_deref())?;
    let seed = cli.seed;
    match &cli.command {
        Command::Solve(a) => solve(a, cli.format.unwrap_or(Format::Json), &mut w)?,
        Command::Rip(a) => rip(
            a,
            cli.format.unwrap_or(Format::Json),
            seed.unwrap_or(0),
            &mut w,
        )?,
        Command::Conditions(a) => conditions(a, cli.format.unwrap_or(Format::Csv), &mut w)?,
        Command::Bounds(a) => bounds(a, cli.format.unwrap_or(Format::Csv), &mut w)?,
        Command::McProb(c) => {
            experiment(&c.config, seed, cli.format, &mut w, exact_recon_probability)?
        }
        Command::Noisy(c) => experiment(&c.config, seed, cli.format, &mut w, noisy_nrmse)?,
        Command::Regsweep(c) => experiment(&c.config, seed, cli.format, &mut w, regmodcs_sweep)?,
        Command::Dynamic(c) => {
            let mut cfg: DynamicRunConfig = read_json(&c.config)?;
            if let Some(s) = seed {
                cfg.model.seed = s;
            }
            let (_, run) = run_dynamic(&cfg)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => run.write_csv(&mut w)?,
                Format::Json => write_json(&mut w, &run)?,
            }
        }
        Command::Gen(g) => generate(g, seed, cli.format.unwrap_or(Format::Csv), &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn solve(a: &SolveArgs, format: Format, w: &mut dyn Write) -> CliResult<()> {
    let matrix = with_path(&a.matrix, load_matrix(&a.matrix))?;
    let y = with_path(&a.y, load_vector(&a.y))?;
    let known = match &a.known {
        Some(p) => with_path(p, load_indices(p))?,
        None => IndexSet::empty(),
    };
    let cfg: SolverConfig = match &a.solver {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    let result = match (a.gamma, &a.mu) {
        (Some(gamma), Some(p)) => {
            let mu = with_path(p, load_vector(p))?;
            solve_regmodcs(&matrix, &y, &known, &mu, gamma, &cfg)?
        }
        _ => solve_modcs(&matrix, &y, &known, &cfg)?,
    };
    match format {
        Format::Json => write_json(w, &result)?,
        Format::Csv => write_vector(&mut *w, &result.x_hat)?,
    }
    if result.status == SolverStatus::Infeasible {
        return Err(CliError::Infeasible(format!(
            "relative residual {:.3e} after row reduction",
            result.primal_residual
        )));
    }
    if result.status == SolverStatus::MaxIter {
        eprintln!(
            "warning: iteration limit reached; duality gap {:.3e}",
            result.duality_gap
        );
    }
    Ok(())
}

fn mode_name(m: ConstantMode) -> &'static str {
    match m {
        ConstantMode::Exact => "exact",
        ConstantMode::LowerBound => "lower-bound",
    }
}

fn rip(a: &RipArgs, format: Format, seed: u64, w: &mut dyn Write) -> CliResult<()> {
    let matrix = with_path(&a.matrix, load_matrix(&a.matrix))?;
    let mut req = RequiredConstants {
        delta: a.delta.clone(),
        theta: Vec::new(),
    };
    if let (Some(k), Some(u)) = (a.k, a.u) {
        req = req.merge(RequiredConstants::for_modcs(k, u));
    }
    if let Some(s) = a.cs_s {
        req = req.merge(RequiredConstants::for_cs(s));
    }
    if req.delta.is_empty() && req.theta.is_empty() {
        return Err(CliError::Config(
            "nothing to compute; pass --k/--u, --cs-s or --delta".into(),
        ));
    }
    let table = RipTable::compute(&matrix, &req, a.sample_trials, seed)?;
    match format {
        Format::Json => write_json(w, &table)?,
        Format::Csv => {
            let mut out = csv::Writer::from_writer(&mut *w);
            out.write_record(["constant", "s1", "s2", "value", "mode"])?;
            for d in &table.delta {
                out.write_record([
                    "delta",
                    &d.s.to_string(),
                    "",
                    &d.value.to_string(),
                    mode_name(d.mode),
                ])?;
            }
            for t in &table.theta {
                out.write_record([
                    "theta",
                    &t.s1.to_string(),
                    &t.s2.to_string(),
                    &t.value.to_string(),
                    mode_name(t.mode),
                ])?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn conditions(a: &ConditionsArgs, format: Format, w: &mut dyn Write) -> CliResult<()> {
    let sizes = SupportSizes::new(a.k, a.u);
    let table = if a.all_zero {
        RipTable::uniform(0.0)
    } else if let Some(p) = &a.table {
        read_json(p)?
    } else if let Some(p) = &a.matrix {
        let m = with_path(p, load_matrix(p))?;
        let mut req = RequiredConstants::for_modcs(a.k, a.u).merge(RequiredConstants {
            delta: vec![a.k + 2 * a.u],
            theta: vec![(a.u, a.u), (a.u, 2 * a.u)],
        });
        if let Some(s) = a.cs_s {
            req = req.merge(RequiredConstants::for_cs(s));
        }
        RipTable::compute(&m, &req, None, 0)?
    } else {
        return Err(CliError::Config(
            "pass one of --table, --matrix or --all-zero".into(),
        ));
    };
    let mut reports: Vec<ConditionReport> = check_all_modcs(sizes, &table)?;
    if let Some(s) = a.cs_s {
        reports.extend(check_cs_conditions(s, &table)?);
    }
    match format {
        Format::Json => write_json(w, &reports)?,
        Format::Csv => {
            let mut out = csv::Writer::from_writer(&mut *w);
            out.write_record(["id", "verdict", "expression", "lhs", "threshold", "holds"])?;
            for r in &reports {
                let verdict = serde_json::to_value(r.verdict)?;
                for c in &r.clauses {
                    out.write_record([
                        r.id.as_str(),
                        verdict.as_str().unwrap_or_default(),
                        c.expression.as_str(),
                        &c.lhs
                            .map(|v| v.to_string())
                            .unwrap_or_else(|| "undefined".into()),
                        &c.threshold.to_string(),
                        &c.holds.to_string(),
                    ])?;
                }
            }
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    m_over_n: f64,
    rule: &'static str,
    max_s_over_n: f64,
}

#[derive(Serialize)]
struct CurveRow {
    m_over_n: f64,
    rule: &'static str,
    s_over_n: f64,
    rho: f64,
    threshold: f64,
}

fn bounds(a: &BoundsArgs, format: Format, w: &mut dyn Write) -> CliResult<()> {
    fn emit<T: Serialize>(rows: &[T], format: Format, w: &mut dyn Write) -> CliResult<()> {
        match format {
            Format::Json => write_json(w, &rows),
            Format::Csv => {
                let mut out = csv::Writer::from_writer(&mut *w);
                for r in rows {
                    out.serialize(r)?;
                }
                out.flush()?;
                Ok(())
            }
        }
    }
    match a.curve_points {
        None => {
            let mut rows = Vec::new();
            for &mn in &a.m_over_n {
                for rule in BoundRule::ALL {
                    rows.push(BoundRow {
                        m_over_n: mn,
                        rule: rule.name(),
                        max_s_over_n: max_sparsity_fraction(mn, rule)?,
                    });
                }
            }
            emit(&rows, format, w)
        }
        Some(points) => {
            let mut rows = Vec::new();
            for &mn in &a.m_over_n {
                for rule in BoundRule::ALL {
                    for (s, rho) in rho_curve(mn, rule, a.max_frac, points)? {
                        rows.push(CurveRow {
                            m_over_n: mn,
                            rule: rule.name(),
                            s_over_n: s,
                            rho,
                            threshold: rule.threshold(),
                        });
                    }
                }
            }
            emit(&rows, format, w)
        }
    }
}

fn experiment(
    path: &Path,
    seed: Option<u64>,
    format: Option<Format>,
    w: &mut dyn Write,
    f: fn(&ExperimentConfig) -> modcs_core::Result<ExperimentReport>,
) -> CliResult<()> {
    let mut cfg: ExperimentConfig = read_json(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let t = std::time::Instant::now();
    let report = f(&cfg)?;
    eprintln!(
        "{} cells in {:.2}s",
        report.cells.len(),
        t.elapsed().as_secs_f64()
    );
    match format.unwrap_or(Format::Csv) {
        Format::Csv => report.write_csv(&mut *w)?,
        Format::Json => report.write_json(&mut *w)?,
    }
    Ok(())
}

fn generate(g: &GenCommand, seed: Option<u64>, format: Format, w: &mut dyn Write) -> CliResult<()> {
    match g {
        GenCommand::Matrix { m, n } => {
            let a = gaussian_matrix(
                *m,
                *n,
                true,
                &mut stream(seed.unwrap_or(0), Purpose::Matrix, 0, 0),
            )?;
            match format {
                Format::Csv => write_matrix(&mut *w, &a)?,
                Format::Json => {
                    let rows: Vec<Vec<f64>> =
                        a.row_iter().map(|r| r.iter().copied().collect()).collect();
                    write_json(w, &rows)?
                }
            }
        }
        GenCommand::Signal { n, s, variance } => {
            if !(*variance >= 0.0) {
                return Err(CliError::Config(format!(
                    "variance must be non-negative, got {variance}"
                )));
            }
            let mut rng = stream(seed.unwrap_or(0), Purpose::Trial, 0, 0);
            let support = random_support(*n, *s, &mut rng)?;
            let mut x = DVector::zeros(*n);
            for &i in support.iter() {
                let z: f64 = rand_normal(&mut rng);
                x[i] = variance.sqrt() * z;
            }
            match format {
                Format::Csv => write_vector(&mut *w, x.as_slice())?,
                Format::Json => write_json(
                    w,
                    &serde_json::json!({ "x": x.as_slice(), "support": support }),
                )?,
            }
        }
        GenCommand::Sequence { config } => {
            let mut model: SequenceModel = read_json(config)?;
            if let Some(s) = seed {
                model.seed = s;
            }
            let frames = generate_sequence(&model)?;
            match format {
                Format::Csv => {
                    let mut out = csv::WriterBuilder::new()
                        .has_headers(false)
                        .from_writer(&mut *w);
                    for f in &frames {
                        out.write_record(f.x.iter().map(|v| v.to_string()))?;
                    }
                    out.flush()?;
                }
                Format::Json => write_json(w, &frames)?,
            }
        }
    }
    Ok(())
}

fn rand_normal(rng: &mut modcs_core::rng::Rng) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}
