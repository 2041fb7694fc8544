//! Experiment execution: one function per subcommand, each emitting a CSV
//! table and a JSON results summary (input echo plus derived parameters).

use std::path::{Path, PathBuf};

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::{json, Value};

use pnme_core::bath::{
    correlationlike_analytic, correlationlike_numeric, npoint_numeric, two_point_analytic,
    BathParams, CorrelatorSpec, Sign,
};
use pnme_core::composite::{convergence_study, CompositeSetup, ConvergenceStudy};
use pnme_core::lindblad::{propagate, steady_state, DensityMatrix, Trajectory};
use pnme_core::models::{decay_rate_sweep, dicke_ket, CollectiveModel};
use pnme_core::multitime::{multitime_exact, multitime_regression, MultiTimeSpec};
use pnme_core::operator::Operator;
use pnme_core::poisson::{
    gaussian_liouvillian, poisson_liouvillian, PoissonGenerator, PoissonParams,
};

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::output::{resolve_output, summary_path, write_csv, write_json, Cell};

/// Dense-superoperator dimension guards for the CLI entry points.
const DENSE_PROPAGATION_DIM_MAX: usize = 64;
const STEADY_DIM_MAX: usize = 32;

pub fn run(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    validate_only: bool,
) -> CliResult<Vec<PathBuf>> {
    match config {
        ExperimentConfig::Simulate(c) => run_simulate(c, out_dir, validate_only),
        ExperimentConfig::Steady(c) => run_steady(c, out_dir, validate_only),
        ExperimentConfig::Corr(c) => run_corr(c, out_dir, validate_only),
        ExperimentConfig::DecayRate(c) => run_decay_rate(c, out_dir, validate_only),
        ExperimentConfig::Converge(c) => run_converge(c, out_dir, validate_only),
        ExperimentConfig::Multitime(c) => run_multitime(c, out_dir, validate_only),
        ExperimentConfig::Sweep(c) => run_sweep(c, out_dir, validate_only),
    }
}

fn build_initial(model: &CollectiveModel, name: InitialStateName) -> CliResult<DensityMatrix> {
    let repr = model.representation;
    let state = match name {
        InitialStateName::Ground => {
            DensityMatrix::pure(&dicke_ket(model.n, 0, repr).map_err(CliError::validation)?)
        }
        InitialStateName::Dicke1 => {
            DensityMatrix::pure(&dicke_ket(model.n, 1, repr).map_err(CliError::validation)?)
        }
        InitialStateName::GroundPlusDicke1 => {
            let g = dicke_ket(model.n, 0, repr).map_err(CliError::validation)?;
            let d = dicke_ket(model.n, 1, repr).map_err(CliError::validation)?;
            let ket: Array1<C64> =
                (&g + &d).mapv(|z| z * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
            DensityMatrix::pure(&ket)
        }
    };
    state.map_err(CliError::validation)
}

fn build_observable(model: &CollectiveModel, name: ObservableName) -> Operator {
    match name {
        ObservableName::PGround => model.ground_projector(),
        ObservableName::Jx => model.jx(),
        ObservableName::Jz => model.jz(),
    }
}

fn poisson_params(model: &CollectiveModel, block: &PoissonBlock) -> CliResult<PoissonParams> {
    PoissonParams::new(
        model.hamiltonian().clone(),
        model.lowering().clone(),
        block.mu,
        block.gamma1_plus,
        block.gamma2_plus,
    )
    .map_err(CliError::validation)
}

fn bath_derived(bath: &BathParams) -> Value {
    json!({
        "gamma1": bath.gamma1(),
        "gamma2": bath.gamma2(),
        "mu": bath.mu(),
        "tau_bath": bath.correlation_time(),
        "markov_ratio_1": bath.gamma1_plus / bath.gamma1_minus,
        "markov_ratio_2": bath.gamma2_plus / bath.gamma1_minus,
    })
}

fn poisson_derived(block: &PoissonBlock) -> Value {
    let w = 2.0 * block.mu * block.mu;
    json!({
        "gaussian_rate_emission": w * block.gamma2_plus,
        "gaussian_rate_absorption": w * block.gamma1_plus,
    })
}

fn finish(
    output: &Path,
    echo: Value,
    derived: Value,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> CliResult<Vec<PathBuf>> {
    write_csv(output, header, rows)?;
    let summary = summary_path(output);
    write_json(
        &summary,
        &json!({
            "config": echo,
            "derived": derived,
            "outputs": [output.to_string_lossy()],
        }),
    )?;
    Ok(vec![output.to_path_buf(), summary])
}

fn trajectory_rows(traj: &Trajectory, names: &[ObservableName]) -> Vec<Vec<Cell>> {
    traj.times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![Cell::Float(t)];
            for name in names {
                row.push(Cell::Float(traj.observables[name.as_str()][i]));
            }
            row
        })
        .collect()
}

fn run_simulate(
    c: &SimulateConfig,
    out_dir: Option<&Path>,
    validate_only: bool,
) -> CliResult<Vec<PathBuf>> {
    let model = c.model.build()?;
    let times = c.times.build()?;
    if c.observables.is_empty() {
        return Err(CliError::Validation("no observables requested".into()));
    }
    let initial = build_initial(&model, c.initial_state)?;
    let params = poisson_params(&model, &c.poisson)?;

    let bath = match (c.engine, &c.bath) {
        (EngineName::Composite, Some(block)) => {
            block.check_mu_consistency(c.poisson.mu)?;
            let bath = block.build()?;
            let expect = |got: f64, want: f64, name: &str| -> CliResult<()> {
                if (got - want).abs() > 1e-12 * want.abs().max(1.0) {
                    return Err(CliError::Validation(format!(
                        "bath {name} = {got} disagrees with the poisson block value {want}"
                    )));
                }
                Ok(())
            };
            expect(bath.gamma1_plus, c.poisson.gamma1_plus, "gamma1_plus")?;
            expect(bath.gamma2_plus, c.poisson.gamma2_plus, "gamma2_plus")?;
            Some(bath)
        }
        (EngineName::Composite, None) => {
            return Err(CliError::Validation(
                "the composite engine requires a bath block".into(),
            ))
        }
        (_, Some(_)) => {
            return Err(CliError::Validation(
                "the bath block is only used by the composite engine".into(),
            ))
        }
        (_, None) => None,
    };

    if c.engine == EngineName::Gaussian && model.dim() > DENSE_PROPAGATION_DIM_MAX {
        return Err(CliError::Validation(format!(
            "gaussian engine limited to system dimension ≤ {DENSE_PROPAGATION_DIM_MAX}"
        )));
    }

    if validate_only {
        return Ok(vec![]);
    }

    let mut traj = match c.engine {
        EngineName::Poisson => {
            // matrix-free: no d²×d² matrix, works for every allowed model size
            let gen = PoissonGenerator::new(&params).map_err(CliError::numerical)?;
            gen.propagate(&initial, &times).map_err(CliError::numerical)?
        }
        EngineName::Gaussian => {
            let gen = gaussian_liouvillian(&params).map_err(CliError::numerical)?;
            propagate(&gen, &initial, &times).map_err(CliError::numerical)?
        }
        EngineName::Composite => {
            let setup = CompositeSetup::new(
                model.hamiltonian().clone(),
                model.lowering().clone(),
                bath.clone().expect("validated above"),
                initial.clone(),
            )
            .map_err(CliError::validation)?;
            setup.reduced_trajectory(&times).map_err(CliError::numerical)?
        }
    };
    for name in &c.observables {
        traj.observe(name.as_str(), &build_observable(&model, *name))
            .map_err(CliError::numerical)?;
    }

    let mut header = vec!["t"];
    for name in &c.observables {
        header.push(name.as_str());
    }
    let rows = trajectory_rows(&traj, &c.observables);

    let mut derived = poisson_derived(&c.poisson);
    if let Some(bath) = &bath {
        derived["bath"] = bath_derived(bath);
    }
    derived["system_dim"] = json!(model.dim());

    let output = resolve_output(out_dir, &c.output);
    finish(&output, serde_json::to_value(c).unwrap(), derived, &header, &rows)
}

fn run_steady(
    c: &SteadyConfig,
    out_dir: Option<&Path>,
    validate_only: bool,
) -> CliResult<Vec<PathBuf>> {
    let build_dense = |model: &Option<ModelBlock>,
                       poisson: &Option<PoissonBlock>|
     -> CliResult<(pnme_core::SuperOperator, Value)> {
        let model = model
            .as_ref()
            .ok_or_else(|| CliError::Validation("this generator requires a model block".into()))?
            .build()?;
        let poisson_block = poisson.as_ref().ok_or_else(|| {
            CliError::Validation("this generator requires a poisson block".into())
        })?;
        if model.dim() > STEADY_DIM_MAX {
            return Err(CliError::Validation(format!(
                "steady-state solve limited to system dimension ≤ {STEADY_DIM_MAX}"
            )));
        }
        let params = poisson_params(&model, poisson_block)?;
        let derived = poisson_derived(poisson_block);
        Ok((
            match c.generator {
                SteadyGenerator::Poisson => {
                    poisson_liouvillian(&params).map_err(CliError::numerical)?
                }
                SteadyGenerator::Gaussian => {
                    gaussian_liouvillian(&params).map_err(CliError::numerical)?
                }
                SteadyGenerator::Bath => unreachable!(),
            },
            derived,
        ))
    };

    let (gen, derived) = match c.generator {
        SteadyGenerator::Bath => {
            let block = c.bath.as_ref().ok_or_else(|| {
                CliError::Validation("the bath generator requires a bath block".into())
            })?;
            if c.model.is_some() || c.poisson.is_some() {
                return Err(CliError::Validation(
                    "the bath generator uses only the bath block".into(),
                ));
            }
            let bath = block.build()?;
            (bath.liouvillian(), bath_derived(&bath))
        }
        _ => {
            if c.bath.is_some() {
                return Err(CliError::Validation(
                    "bath block is only used by the bath generator".into(),
                ));
            }
            build_dense(&c.model, &c.poisson)?
        }
    };

    if validate_only {
        return Ok(vec![]);
    }

    let ss = steady_state(&gen).map_err(CliError::numerical)?;
    let rows: Vec<Vec<Cell>> = (0..ss.dim())
        .map(|i| vec![Cell::Int(i as i64), Cell::Float(ss.population(i))])
        .collect();

    let mut derived = derived;
    if let (Some(model_block), Some(poisson_block)) = (&c.model, &c.poisson) {
        // Collective dynamics started in the symmetric sector equilibrates to
        // the sector-restricted Boltzmann distribution, not the full-space
        // Gibbs state; report both reference ground-state populations.
        if poisson_block.gamma2_plus > 0.0 {
            let n = model_block.n as i32;
            let q = poisson_block.gamma1_plus / poisson_block.gamma2_plus;
            let sector = if (q - 1.0).abs() < 1e-15 {
                1.0 / (n as f64 + 1.0)
            } else {
                (1.0 - q) / (1.0 - q.powi(n + 1))
            };
            let full_gibbs = 1.0 / (1.0 + q).powi(n);
            derived["reference"] = json!({
                "sector_boltzmann_p_ground": sector,
                "full_gibbs_p_ground": full_gibbs,
            });
        }
    }

    let output = resolve_output(out_dir, &c.output);
    finish(
        &output,
        serde_json::to_value(c).unwrap(),
        derived,
        &["index", "population"],
        &rows,
    )
}

fn run_corr(c: &CorrConfig, out_dir: Option<&Path>, validate_only: bool) -> CliResult<Vec<PathBuf>> {
    let bath = c.bath.build()?;
    if c.indices.len() != 2 {
        return Err(CliError::Validation(format!(
            "corr needs exactly two index pairs, got {}",
            c.indices.len()
        )));
    }
    let idx1 = c.indices[0].build()?;
    let idx2 = c.indices[1].build()?;
    let t_values = c.t_grid.build()?;

    let rows: Vec<Vec<Cell>>;
    let header: Vec<&str>;
    match c.correlator {
        CorrelatorType::TwoPoint => {
            if c.init.is_some() || c.s_grid.is_some() {
                return Err(CliError::Validation(
                    "two_point correlators take no init or s_grid".into(),
                ));
            }
            if validate_only {
                return Ok(vec![]);
            }
            header = vec!["t", "re", "im", "analytic_re", "analytic_im", "abs_err"];
            rows = t_values
                .iter()
                .map(|&t| -> CliResult<Vec<Cell>> {
                    let spec = CorrelatorSpec::new(vec![idx1, idx2], vec![t, 0.0])
                        .map_err(CliError::validation)?;
                    let numeric = npoint_numeric(&bath, &spec).map_err(CliError::numerical)?;
                    let analytic = two_point_analytic(&bath, idx1, idx2, t);
                    Ok(vec![
                        Cell::Float(t),
                        Cell::Float(numeric.re),
                        Cell::Float(numeric.im),
                        Cell::Float(analytic.re),
                        Cell::Float(analytic.im),
                        Cell::Float((numeric - analytic).norm()),
                    ])
                })
                .collect::<CliResult<_>>()?;
        }
        CorrelatorType::CorrelationLike => {
            let init = match c.init.as_deref() {
                Some("+") => Sign::Plus,
                Some("-") => Sign::Minus,
                Some(other) => {
                    return Err(CliError::Validation(format!(
                        "init must be \"+\" or \"-\", got {other:?}"
                    )))
                }
                None => {
                    return Err(CliError::Validation(
                        "correlation_like requires an init sign".into(),
                    ))
                }
            };
            let s_values = c
                .s_grid
                .as_ref()
                .ok_or_else(|| {
                    CliError::Validation("correlation_like requires an s_grid".into())
                })?
                .build()?;
            if validate_only {
                return Ok(vec![]);
            }
            header = vec!["t", "s", "re", "im", "analytic_re", "analytic_im", "abs_err"];
            let mut out = Vec::with_capacity(t_values.len() * s_values.len());
            for &t in &t_values {
                for &s in &s_values {
                    let numeric = correlationlike_numeric(&bath, idx1, idx2, init, t, s)
                        .map_err(CliError::numerical)?;
                    let analytic = correlationlike_analytic(&bath, idx1, idx2, init, t, s);
                    out.push(vec![
                        Cell::Float(t),
                        Cell::Float(s),
                        Cell::Float(numeric.re),
                        Cell::Float(numeric.im),
                        Cell::Float(analytic.re),
                        Cell::Float(analytic.im),
                        Cell::Float((numeric - analytic).norm()),
                    ]);
                }
            }
            rows = out;
        }
    }

    let output = resolve_output(out_dir, &c.output);
    finish(
        &output,
        serde_json::to_value(c).unwrap(),
        bath_derived(&bath),
        &header,
        &rows,
    )
}

fn run_decay_rate(
    c: &DecayRateConfig,
    out_dir: Option<&Path>,
    validate_only: bool,
) -> CliResult<Vec<PathBuf>> {
    let sweep =
        decay_rate_sweep(c.x_min, c.x_max, c.points, c.gamma2_plus).map_err(CliError::validation)?;
    if validate_only {
        return Ok(vec![]);
    }
    let rows: Vec<Vec<Cell>> = sweep
        .iter()
        .map(|row| {
            vec![
                Cell::Float(row.mu_sq_n),
                Cell::Float(row.poisson_rate),
                Cell::Float(row.gaussian_rate),
            ]
        })
        .collect();
    let output = resolve_output(out_dir, &c.output);
    finish(
        &output,
        serde_json::to_value(c).unwrap(),
        json!({
            "normalization": "rates are in units of gamma2_plus",
            "saturation_rate": 0.5,
        }),
        &["mu_sq_n", "poisson_rate", "gaussian_rate"],
        &rows,
    )
}

fn run_converge(
    c: &ConvergeConfig,
    out_dir: Option<&Path>,
    validate_only: bool,
) -> CliResult<Vec<PathBuf>> {
    let model = c.model.build()?;
    let times = c.times.build()?;
    if c.gamma_minus_ladder.is_empty() {
        return Err(CliError::Validation("empty gamma_minus_ladder".into()));
    }
    if c.gamma_minus_ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Validation(
            "gamma_minus_ladder must be strictly ascending".into(),
        ));
    }
    if c.observables.is_empty() {
        return Err(CliError::Validation("no observables requested".into()));
    }
    let initial = build_initial(&model, c.initial_state)?;
    // composite dimension guard up front, so validation catches it
    if model.dim() * 4 > 128 {
        return Err(CliError::Validation(format!(
            "composite dimension {} exceeds 128; use the symmetric representation",
            model.dim() * 4
        )));
    }
    poisson_params(&model, &c.poisson)?;

    if validate_only {
        return Ok(vec![]);
    }

    let study = ConvergenceStudy {
        system_h: model.hamiltonian().clone(),
        coupling: model.lowering().clone(),
        initial_system: initial,
        omega1: c.omega1,
        omega2: c.omega2,
        gamma1_plus: c.poisson.gamma1_plus,
        gamma2_plus: c.poisson.gamma2_plus,
        mu: c.poisson.mu,
        gamma_minus_ladder: c.gamma_minus_ladder.clone(),
        times,
        observables: c
            .observables
            .iter()
            .map(|name| (name.as_str().to_string(), build_observable(&model, *name)))
            .collect(),
    };
    let rows_data = convergence_study(&study).map_err(CliError::numerical)?;
    let rows: Vec<Vec<Cell>> = rows_data
        .iter()
        .map(|r| {
            vec![
                Cell::Float(r.gamma_minus),
                Cell::Float(r.lambda),
                Cell::Text(r.observable.clone()),
                Cell::Float(r.max_dev),
                Cell::Float(r.final_dev),
                Cell::Float(r.markov_ratio),
            ]
        })
        .collect();

    let output = resolve_output(out_dir, &c.output);
    finish(
        &output,
        serde_json::to_value(c).unwrap(),
        poisson_derived(&c.poisson),
        &["gamma_minus", "lambda", "observable", "max_dev", "final_dev", "markov_ratio"],
        &rows,
    )
}

fn run_multitime(
    c: &MultitimeConfig,
    out_dir: Option<&Path>,
    validate_only: bool,
) -> CliResult<Vec<PathBuf>> {
    let model = c.model.build()?;
    let params = poisson_params(&model, &c.poisson)?;
    c.bath.check_mu_consistency(c.poisson.mu)?;
    let bath = c.bath.build()?;
    for (got, want, name) in [
        (bath.gamma1_plus, c.poisson.gamma1_plus, "gamma1_plus"),
        (bath.gamma2_plus, c.poisson.gamma2_plus, "gamma2_plus"),
    ] {
        if (got - want).abs() > 1e-12 * want.abs().max(1.0) {
            return Err(CliError::Validation(format!(
                "bath {name} = {got} disagrees with the poisson block value {want}"
            )));
        }
    }
    if c.t2_values.is_empty() || c.gap_values.is_empty() {
        return Err(CliError::Validation("empty t2_values or gap_values".into()));
    }
    if c
        .t2_values
        .iter()
        .chain(&c.gap_values)
        .any(|v| !v.is_finite() || *v < 0.0)
    {
        return Err(CliError::Validation(
            "t2_values and gap_values must be non-negative".into(),
        ));
    }
    let initial = build_initial(&model, c.initial_state)?;
    let op = match c.op {
        MultitimeOperator::SigmaX => {
            if model.dim() != 2 {
                return Err(CliError::Validation(
                    "sigma_x requires a single-spin model".into(),
                ));
            }
            pnme_core::operator::sigma_x()
        }
        MultitimeOperator::Jx => model.jx(),
        MultitimeOperator::Jz => model.jz(),
    };
    let setup = CompositeSetup::new(
        model.hamiltonian().clone(),
        model.lowering().clone(),
        bath.clone(),
        initial.clone(),
    )
    .map_err(CliError::validation)?;
    if setup.composite_dim() > 128 {
        return Err(CliError::Validation(format!(
            "composite dimension {} exceeds 128",
            setup.composite_dim()
        )));
    }

    if validate_only {
        return Ok(vec![]);
    }

    let mut rows = Vec::new();
    for &t2 in &c.t2_values {
        for &gap in &c.gap_values {
            let t1 = t2 + gap;
            let spec =
                MultiTimeSpec::new(op.clone(), vec![t1, t2]).map_err(CliError::validation)?;
            let exact = multitime_exact(&setup, &spec).map_err(CliError::numerical)?;
            let regression =
                multitime_regression(&params, &initial, &spec).map_err(CliError::numerical)?;
            rows.push(vec![
                Cell::Float(t1),
                Cell::Float(t2),
                Cell::Float(exact.re),
                Cell::Float(exact.im),
                Cell::Text("exact".into()),
            ]);
            rows.push(vec![
                Cell::Float(t1),
                Cell::Float(t2),
                Cell::Float(regression.re),
                Cell::Float(regression.im),
                Cell::Text("regression".into()),
            ]);
        }
    }

    let mut derived = poisson_derived(&c.poisson);
    derived["bath"] = bath_derived(&bath);

    let output = resolve_output(out_dir, &c.output);
    finish(
        &output,
        serde_json::to_value(c).unwrap(),
        derived,
        &["t1", "t2", "re", "im", "source"],
        &rows,
    )
}

fn run_sweep(
    c: &SweepConfig,
    out_dir: Option<&Path>,
    validate_only: bool,
) -> CliResult<Vec<PathBuf>> {
    if c.experiments.is_empty() {
        return Err(CliError::Validation("sweep contains no experiments".into()));
    }
    let configs: Vec<ExperimentConfig> = c
        .experiments
        .iter()
        .map(|value| {
            let parsed = parse_config(value)?;
            if matches!(parsed, ExperimentConfig::Sweep(_)) {
                return Err(CliError::Validation("sweeps cannot nest".into()));
            }
            Ok(parsed)
        })
        .collect::<CliResult<_>>()?;

    // validate everything before launching any work
    for config in &configs {
        run(config, out_dir, true)?;
    }
    if validate_only {
        return Ok(vec![]);
    }

    let results: Vec<CliResult<Vec<PathBuf>>> = configs
        .par_iter()
        .map(|config| run(config, out_dir, false))
        .collect();

    let mut outputs = Vec::new();
    for result in results {
        outputs.extend(result?);
    }

    let summary = resolve_output(out_dir, &c.output);
    write_json(
        &summary,
        &json!({
            "config": serde_json::to_value(c).unwrap(),
            "derived": { "experiments": configs.len() },
            "outputs": outputs.iter().map(|p| p.to_string_lossy()).collect::<Vec<_>>(),
        }),
    )?;
    outputs.push(summary);
    Ok(outputs)
}
