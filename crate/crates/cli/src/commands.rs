use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lxdr_core::attribution::{ridge_predictor_fit, whatif_tweak, RidgePredictor};
use lxdr_core::data::{load_bundled, load_csv, standardize, BundledDataset, Dataset, TargetColumn};
use lxdr_core::dr::PcaSpectrum;
use lxdr_core::evaluation::{
    instance_difference, run_scaling_experiment, run_table_experiment, table_datasets,
    weights_difference, ExperimentOptions, ExperimentReport, ScalingConfig,
};
use lxdr_core::{
    lxdr_explain, DrKind, Execution, Explanation, FitParams, FittedDR, LxdrConfig, NgConfig,
    Reducer,
};
use serde::Serialize;

use crate::args::{
    Cli, Command, DataArgs, EvalArgs, ExplainArgs, FitArgs, ModelInput, Suite, WhatifArgs,
};

/// A problem with the command line that clap could not see on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn run(cli: Cli) -> Result<()> {
    let output = cli.output.as_deref();
    match cli.command {
        Command::Fit(args) => fit(args, cli.seed, output),
        Command::Explain(args) => explain(args, cli.seed, output),
        Command::Eval(args) => eval(args, cli.seed, output),
        Command::Whatif(args) => whatif(args, output),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, &text)
}

fn load_data(args: &DataArgs) -> Result<Dataset> {
    let path = PathBuf::from(&args.data);
    let dataset = if !path.exists() {
        if let Ok(which) = args.data.parse::<BundledDataset>() {
            load_bundled(which)?
        } else {
            bail!(
                "no such file `{}` and no bundled dataset of that name",
                args.data
            );
        }
    } else {
        let target = args.target.as_deref().map(|t| match t {
            "last" => TargetColumn::Last,
            _ => t
                .parse()
                .map_or_else(|_| TargetColumn::Name(t.to_string()), TargetColumn::Index),
        });
        load_csv(&path, !args.no_header, target)?
    };
    Ok(if args.standardize {
        standardize(&dataset)?.0
    } else {
        dataset
    })
}

fn load_model(path: &Path) -> Result<FittedDR> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    FittedDR::from_json(&text).with_context(|| format!("parsing model {}", path.display()))
}

/// A resolved `--instance`: the feature vector and, when given by index, its row.
struct Instance {
    x: Vec<f64>,
    row: Option<usize>,
}

fn resolve_instance(spec: &str, data: &Dataset) -> Result<Instance> {
    let spec = spec.trim();
    if !spec.contains(',') {
        let row: usize = spec.parse().map_err(|_| {
            UsageError(format!(
                "--instance `{spec}` is neither a row index nor a vector"
            ))
        })?;
        let x = data.features.get_row(row)?.to_vec();
        return Ok(Instance { x, row: Some(row) });
    }
    let x = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| UsageError(format!("--instance entry `{s}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if x.len() != data.cols() {
        bail!(
            "--instance has {} values but the data has {} features",
            x.len(),
            data.cols()
        );
    }
    Ok(Instance { x, row: None })
}

fn fit(args: FitArgs, seed: u64, output: Option<&Path>) -> Result<()> {
    let data = load_data(&args.data)?;
    let kind = DrKind::from(args.method);
    let n_components = match (args.components, args.variance) {
        (Some(n), _) => n as usize,
        (None, Some(v)) => {
            let n = PcaSpectrum::compute(&data.features)?.components_for_variance(v);
            eprintln!("{} PCA components retain {v} of the variance", n);
            n
        }
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let mut params = FitParams::new(kind, n_components, seed);
    params.gamma = args.gamma;
    params.epochs = args.epochs;
    let model = FittedDR::fit(&data.features, &params)?;
    eprintln!(
        "fitted {} on {}: {} -> {} dimensions",
        kind,
        data.name,
        model.input_dims(),
        model.reduced_dims()
    );

    if let Some(path) = &args.predictor_out {
        let target = data
            .target
            .as_ref()
            .context("--predictor-out needs a dataset with a target column")?;
        let reduced = model.transform_batch(&data.features)?;
        let predictor = ridge_predictor_fit(&reduced, target, args.predictor_alpha)?;
        fs::write(path, serde_json::to_string_pretty(&predictor)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit(output, &(model.to_json() + "\n"))
}

#[derive(Serialize)]
struct ExplainOutput<'a> {
    #[serde(flatten)]
    explanation: &'a Explanation,
    #[serde(skip_serializing_if = "Option::is_none")]
    instance_row: Option<usize>,
    instance_difference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights_difference: Option<f64>,
}

fn explain(args: ExplainArgs, seed: u64, output: Option<&Path>) -> Result<()> {
    let (model, data, instance) = load_inputs(&args.input)?;
    let neighborhood = NgConfig {
        generator: args.ng.into(),
        k: args.k.map(|k| k as usize),
        seed,
        perturbation_scale: args.scale,
    };
    let mut config = LxdrConfig::new(neighborhood, args.auto_alpha);
    config.alpha_default = args.alpha;
    let explanation = lxdr_explain(&model, &data.features, &instance.x, &config)?;
    let weights_difference = if args.reference_pca {
        let reference = model
            .intrinsic_weights()
            .with_context(|| format!("--reference-pca needs a PCA model, got {}", model.kind()))?;
        let d = weights_difference(&explanation, reference)?.value;
        eprintln!("weights difference: {d}");
        Some(d)
    } else {
        None
    };
    let out = ExplainOutput {
        explanation: &explanation,
        instance_row: instance.row,
        instance_difference: instance_difference(&model, &explanation, &instance.x)?.value,
        weights_difference,
    };
    emit_json(output, &out)
}

fn load_inputs(input: &ModelInput) -> Result<(FittedDR, Dataset, Instance)> {
    let model = load_model(&input.model)?;
    let data = load_data(&input.data)?;
    if data.cols() != model.input_dims() {
        bail!(
            "model expects {} features but the data has {}",
            model.input_dims(),
            data.cols()
        );
    }
    let instance = resolve_instance(&input.instance, &data)?;
    Ok((model, data, instance))
}

fn whatif(args: WhatifArgs, output: Option<&Path>) -> Result<()> {
    let (model, data, instance) = load_inputs(&args.input)?;
    let predictor: Option<RidgePredictor> = match &args.predictor {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing predictor {}", path.display()))?,
            )
        }
        None => None,
    };
    if args.feature >= data.cols() {
        bail!(
            "feature {} out of range: the data has {} features",
            args.feature,
            data.cols()
        );
    }
    let value = match args.value {
        Some(v) => v,
        None => data.features.column_means()[args.feature],
    };
    let tweak = whatif_tweak(&model, predictor.as_ref(), &instance.x, args.feature, value)?;
    emit_json(output, &tweak)
}

fn eval(args: EvalArgs, seed: u64, output: Option<&Path>) -> Result<()> {
    let mut options = ExperimentOptions::new(seed);
    options.record_timing = !args.no_timing;
    options.epochs = args.epochs;
    if args.sequential {
        options.execution = Execution::Sequential;
    }
    let report = match args.suite {
        Suite::Tables => {
            let mut datasets = table_datasets(seed)?;
            if !args.datasets.is_empty() {
                datasets.retain(|d| args.datasets.contains(&d.name));
            }
            let methods: Vec<DrKind> = args.methods.iter().map(|&m| m.into()).collect();
            run_table_experiment(&datasets, &methods, &options)
        }
        Suite::Scaling => {
            let mut config = ScalingConfig::default();
            if !args.features.is_empty() {
                config.feature_counts = args.features.clone();
            }
            if !args.k.is_empty() {
                config.k_values = args.k.clone();
            }
            config.queries_per_dataset = args.queries;
            run_scaling_experiment(&config, &options)?
        }
    };
    emit(output, &report.to_csv())?;
    check_cells(&report)
}

/// Fails when some cell produced no value at all.
fn check_cells(report: &ExperimentReport) -> Result<()> {
    let dead: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.mean_value.is_none())
        .map(|r| {
            format!(
                "{}/{}/{}/k={}/{}",
                r.dataset,
                r.dr_method.label(),
                r.explainer.as_str(),
                r.k,
                r.metric
            )
        })
        .collect();
    if dead.is_empty() {
        Ok(())
    } else {
        bail!(
            "{} cell(s) failed for every instance: {}",
            dead.len(),
            dead.join(", ")
        )
    }
}
