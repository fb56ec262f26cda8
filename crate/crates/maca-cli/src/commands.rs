//! Implementations of the CLI commands. Every command resolves its inputs,
//! computes all output content, then writes files atomically, so a failing
//! run leaves no partial outputs behind.

use std::fs;
use std::path::{Path, PathBuf};

use maca_core::ca::{enumerate_basins, BoundaryMode, RuleNumber, RuleVector};
use maca_core::classifier::{train_tree_traced, ClassId, MacaTree};
use maca_core::diagnostics::CRITICAL_ENTROPY_REFERENCE;
use maca_core::error::{Error, Result};
use maca_core::ga::{evolve, GaParams, GenerationTrace};
use maca_core::io::synth::diagnostic_patterns;
use maca_core::io::{
    evaluate as evaluate_labels, load_dataset, load_model, model_to_string, parse_fasta,
    write_atomic, write_fasta, Dataset, DatasetManifest, EncodingOptions, FastaRecord,
};
use maca_core::pipeline::{
    predict_structure as predict_structure_seq, predict_structure_signal, AminoAcidSeq,
    StructureSeq,
};

use crate::{
    BasinsArgs, DiagnoseArgs, EncodeArgs, EvaluateArgs, GaOpts, PredictArgs, PredictStructureArgs,
    TrainArgs,
};

/// CA sizes traced by `diagnose`.
const DIAGNOSE_SIZES: [usize; 4] = [10, 15, 20, 30];

const TRACE_HEADER: &str = "generation,best_fitness,mean_fitness,entropy,mutual_information";

fn encoding_options(data: &crate::DataOpts) -> EncodingOptions {
    EncodingOptions {
        window: data.window,
        stride: data.stride,
        quant_bits: data.quant_bits,
        ..EncodingOptions::default()
    }
}

fn ga_params(ga: &GaOpts, seed: u64, seed_identity: bool, n: usize) -> Result<GaParams> {
    let mut params = GaParams {
        population_size: ga.pop_size,
        mutation_bit_rate: ga.mutation_rate,
        max_generations: ga.generations,
        rng_seed: seed,
        ..GaParams::default()
    };
    if seed_identity {
        params.seed_candidates.push(RuleVector::identity(n)?);
    }
    params.validate()?;
    Ok(params)
}

fn load(manifest_path: &Path, opts: &EncodingOptions) -> Result<(DatasetManifest, Dataset)> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let dataset = load_dataset(&manifest, opts)?;
    Ok((manifest, dataset))
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_run_config(dir: &Path, config: serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(&config).expect("config is serializable") + "\n";
    write_atomic(&dir.join("run_config.json"), text.as_bytes())
}

fn trace_csv(trace: &[GenerationTrace], extra_header: &str, extra_cell: &str) -> String {
    let mut out = format!("{TRACE_HEADER}{extra_header}\n");
    for row in trace {
        out.push_str(&format!(
            "{},{},{},{},{}{extra_cell}\n",
            row.generation, row.best_fitness, row.mean_fitness, row.entropy, row.mutual_information
        ));
    }
    out
}

pub fn train(args: TrainArgs) -> Result<()> {
    let opts = encoding_options(&args.data);
    let (manifest, dataset) = load(&args.data.manifest, &opts)?;
    let params = ga_params(&args.ga, args.seed, args.seed_identity, dataset.n)?;

    let (tree, node_traces) = train_tree_traced(
        &dataset.patterns,
        &dataset.classes,
        &params,
        args.max_depth,
        args.boundary,
    )?;
    let accuracy = maca_core::classifier::training_accuracy(&tree, &dataset.patterns)?;

    prepare_out_dir(&args.out_dir)?;
    write_atomic(
        &args.out_dir.join("model.maca"),
        model_to_string(&tree).as_bytes(),
    )?;
    for node in &node_traces {
        write_atomic(
            &args.out_dir.join(format!("trace_node{}.csv", node.node_id)),
            trace_csv(&node.trace, "", "").as_bytes(),
        )?;
    }
    write_run_config(
        &args.out_dir,
        serde_json::json!({
            "command": "train",
            "manifest": args.data.manifest,
            "task": manifest.task,
            "window": opts.window,
            "stride": opts.stride,
            "quant_bits": opts.quant_bits,
            "boundary": args.boundary.to_string(),
            "max_depth": args.max_depth,
            "seed": args.seed,
            "seed_identity": args.seed_identity,
            "ga": params,
            "patterns": dataset.patterns.len(),
            "n": dataset.n,
        }),
    )?;

    println!(
        "trained on {} patterns (n={}, {} classes), tree depth {}, {} GA nodes",
        dataset.patterns.len(),
        dataset.n,
        dataset.classes.len(),
        tree.depth(),
        node_traces.len()
    );
    println!("training accuracy: {accuracy}");
    println!(
        "model written to {}",
        args.out_dir.join("model.maca").display()
    );
    Ok(())
}

fn classify_dataset(tree: &MacaTree, dataset: &Dataset) -> Result<Vec<ClassId>> {
    if tree.n != dataset.n {
        return Err(Error::DimensionMismatch {
            expected: tree.n,
            got: dataset.n,
        });
    }
    dataset
        .patterns
        .iter()
        .map(|p| tree.classify(&p.bits))
        .collect()
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let opts = encoding_options(&args.data);
    let (_, dataset) = load(&args.data.manifest, &opts)?;
    let tree = load_model(&args.model)?;
    let predicted = classify_dataset(&tree, &dataset)?;

    let mut csv = String::from("index,bits,label\n");
    for (i, (pattern, label)) in dataset.patterns.iter().zip(&predicted).enumerate() {
        csv.push_str(&format!(
            "{i},{},{}\n",
            pattern.bits,
            tree.class_name(*label)
        ));
    }

    prepare_out_dir(&args.out_dir)?;
    write_atomic(&args.out_dir.join("predictions.csv"), csv.as_bytes())?;
    write_run_config(
        &args.out_dir,
        serde_json::json!({
            "command": "predict",
            "manifest": args.data.manifest,
            "model": args.model,
            "window": opts.window,
            "stride": opts.stride,
            "quant_bits": opts.quant_bits,
            "patterns": dataset.patterns.len(),
        }),
    )?;
    println!(
        "classified {} patterns; predictions in {}",
        dataset.patterns.len(),
        args.out_dir.join("predictions.csv").display()
    );
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let opts = encoding_options(&args.data);
    let (_, dataset) = load(&args.data.manifest, &opts)?;
    let tree = load_model(&args.model)?;

    // The model's class table governs the report; dataset labels must map
    // into it by name.
    let mapping: Vec<ClassId> = dataset
        .classes
        .iter()
        .map(|name| {
            tree.classes
                .iter()
                .position(|c| c == name)
                .map(|i| ClassId(i as u16))
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "dataset class {name:?} is unknown to the model (classes {:?})",
                        tree.classes
                    ))
                })
        })
        .collect::<Result<_>>()?;
    let truth: Vec<ClassId> = dataset
        .patterns
        .iter()
        .map(|p| mapping[p.label.0 as usize])
        .collect();
    let predicted = classify_dataset(&tree, &dataset)?;
    let report = evaluate_labels(&predicted, &truth, &tree.classes)?;

    prepare_out_dir(&args.out_dir)?;
    let json = serde_json::to_string_pretty(&report).expect("report is serializable") + "\n";
    write_atomic(&args.out_dir.join("report.json"), json.as_bytes())?;
    write_run_config(
        &args.out_dir,
        serde_json::json!({
            "command": "evaluate",
            "manifest": args.data.manifest,
            "model": args.model,
            "window": opts.window,
            "stride": opts.stride,
            "quant_bits": opts.quant_bits,
            "patterns": dataset.patterns.len(),
        }),
    )?;
    println!("accuracy: {}", report.accuracy);
    println!(
        "report written to {}",
        args.out_dir.join("report.json").display()
    );
    Ok(())
}

pub fn basins(args: BasinsArgs) -> Result<()> {
    let rules = match (&args.rule, &args.rules) {
        (Some(rule), None) => RuleVector::uniform(RuleNumber(*rule), args.n)?,
        (None, Some(list)) => {
            let values: Vec<u8> = list
                .split(',')
                .map(|tok| {
                    tok.trim().parse().map_err(|_| {
                        Error::InvalidParameter(format!("invalid rule number {tok:?}"))
                    })
                })
                .collect::<Result<_>>()?;
            let vector = RuleVector::from_values(&values)?;
            if vector.len() != args.n {
                return Err(Error::InvalidParameter(format!(
                    "--rules lists {} cells but --n is {}",
                    vector.len(),
                    args.n
                )));
            }
            vector
        }
        _ => {
            return Err(Error::InvalidParameter(
                "exactly one of --rule or --rules is required".into(),
            ))
        }
    };

    let basins = enumerate_basins(&rules, args.boundary)?;
    let mut csv = String::from("attractor,basin_size,cycle_length\n");
    for basin in &basins {
        csv.push_str(&format!(
            "{},{},{}\n",
            basin.key(),
            basin.size(),
            basin.cycle_len()
        ));
    }

    prepare_out_dir(&args.out_dir)?;
    write_atomic(&args.out_dir.join("basins.csv"), csv.as_bytes())?;
    write_run_config(
        &args.out_dir,
        serde_json::json!({
            "command": "basins",
            "n": args.n,
            "rules": rules.to_string(),
            "boundary": args.boundary.to_string(),
        }),
    )?;
    println!(
        "{} basins over {} states; table in {}",
        basins.len(),
        1u64 << args.n,
        args.out_dir.join("basins.csv").display()
    );
    Ok(())
}

pub fn diagnose(args: DiagnoseArgs) -> Result<()> {
    if args.patterns < 2 {
        return Err(Error::InvalidParameter(
            "--patterns must be at least 2".into(),
        ));
    }
    let mut outputs: Vec<(PathBuf, String)> = Vec::new();
    let mut summaries = Vec::new();
    for &n in &DIAGNOSE_SIZES {
        let params = ga_params(&args.ga, args.seed ^ (n as u64), false, n)?;
        let patterns =
            diagnostic_patterns(args.patterns, n, args.seed ^ (n as u64).rotate_left(17));
        let (best, trace) = evolve(&patterns, &params, BoundaryMode::Null)?;
        let csv = trace_csv(
            &trace,
            ",critical_entropy",
            &format!(",{CRITICAL_ENTROPY_REFERENCE}"),
        );
        outputs.push((args.out_dir.join(format!("diagnose_n{n}.csv")), csv));
        summaries.push(format!(
            "n={n}: {} generations, best fitness {}",
            trace.len(),
            best.fitness.unwrap_or(0.0)
        ));
    }

    prepare_out_dir(&args.out_dir)?;
    for (path, csv) in &outputs {
        write_atomic(path, csv.as_bytes())?;
    }
    write_run_config(
        &args.out_dir,
        serde_json::json!({
            "command": "diagnose",
            "sizes": DIAGNOSE_SIZES,
            "patterns": args.patterns,
            "pop_size": args.ga.pop_size,
            "generations": args.ga.generations,
            "mutation_rate": args.ga.mutation_rate,
            "seed": args.seed,
            "critical_entropy": CRITICAL_ENTROPY_REFERENCE,
        }),
    )?;
    for line in summaries {
        println!("{line}");
    }
    Ok(())
}

fn single_record(path: &Path) -> Result<FastaRecord> {
    let records = parse_fasta(&fs::read_to_string(path)?)?;
    records
        .into_iter()
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("{path:?} holds no records")))
}

pub fn predict_structure(args: PredictStructureArgs) -> Result<()> {
    let base = single_record(&args.base)?;
    let base_structure = single_record(&args.base_structure)?;
    let targets = parse_fasta(&fs::read_to_string(&args.target)?)?;
    if targets.is_empty() {
        return Err(Error::InvalidInput("target FASTA holds no records".into()));
    }
    let bp = AminoAcidSeq::new(&base.sequence)?;
    let bs = StructureSeq::new(&base_structure.sequence)?;
    let table = args.code_table.table();

    let mut predictions = Vec::with_capacity(targets.len());
    let mut signals = Vec::new();
    for record in &targets {
        let tp = AminoAcidSeq::new(&record.sequence)?;
        let predicted = predict_structure_seq(&bp, &bs, &tp, args.filter_len, &table)?;
        if args.dump_signal {
            let signal = predict_structure_signal(&bp, &bs, &tp, args.filter_len, &table)?;
            let mut csv = String::from("position,response\n");
            for (i, v) in signal.iter().enumerate() {
                csv.push_str(&format!("{i},{v}\n"));
            }
            signals.push((
                args.out_dir.join(format!("response_{}.csv", record.id)),
                csv,
            ));
        }
        predictions.push(FastaRecord {
            id: record.id.clone(),
            description: "predicted".into(),
            sequence: predicted.as_str().to_string(),
        });
    }

    prepare_out_dir(&args.out_dir)?;
    write_atomic(
        &args.out_dir.join("predicted.fasta"),
        write_fasta(&predictions).as_bytes(),
    )?;
    for (path, csv) in &signals {
        write_atomic(path, csv.as_bytes())?;
    }
    write_run_config(
        &args.out_dir,
        serde_json::json!({
            "command": "predict-structure",
            "base": args.base,
            "base_structure": args.base_structure,
            "target": args.target,
            "filter_len": args.filter_len,
            "code_table": args.code_table.label(),
            "targets": predictions.len(),
        }),
    )?;
    println!(
        "predicted {} structures; output in {}",
        predictions.len(),
        args.out_dir.join("predicted.fasta").display()
    );
    Ok(())
}

pub fn encode(args: EncodeArgs) -> Result<()> {
    let opts = encoding_options(&args.data);
    let (_, dataset) = load(&args.data.manifest, &opts)?;
    let mut csv = String::from("bits,label\n");
    for pattern in &dataset.patterns {
        csv.push_str(&format!(
            "{},{}\n",
            pattern.bits, dataset.classes[pattern.label.0 as usize]
        ));
    }

    prepare_out_dir(&args.out_dir)?;
    write_atomic(&args.out_dir.join("patterns.csv"), csv.as_bytes())?;
    write_run_config(
        &args.out_dir,
        serde_json::json!({
            "command": "encode",
            "manifest": args.data.manifest,
            "window": opts.window,
            "stride": opts.stride,
            "quant_bits": opts.quant_bits,
            "patterns": dataset.patterns.len(),
            "n": dataset.n,
        }),
    )?;
    println!(
        "encoded {} patterns (n={}); table in {}",
        dataset.patterns.len(),
        dataset.n,
        args.out_dir.join("patterns.csv").display()
    );
    Ok(())
}
