use std::collections::BTreeMap;
use std::time::Instant;

use balanced_core::embedding::{
    center_project, distortion_report, drop_small_coordinates, embed as build_embedding, embed_unchecked, hyperplane_check,
    keep_top_coordinates, lipschitz_audit, pca_reduce, rank_correlation, separation_check, Embedding,
};
use balanced_core::exact::{format_rational, rational_to_f64};
use balanced_core::greedy::RunConfig;
use balanced_core::io::{parse_measure, write_coordinates_csv, write_edge_list, write_measure, write_points};
use balanced_core::measure::{
    brute_force_balanced, energy_exact, energy_quadratic, OracleMode, DEFAULT_BALANCE_TOL,
};
use balanced_core::pipeline::{greedy_balanced, MeasureSource, PipelineConfig};
use balanced_core::{
    all_pairs_distances, boundary as boundary_set, is_balanced, isoperimetric_report, BoundarySet, DistanceMatrix,
    TieBreak, VertexMeasure,
};

use crate::args::{
    BalanceArgs, BoundaryArgs, EmbedArgs, GenerateArgs, GeneratorKind, GreedyArgs, GreedyOptions, OracleArgs,
    OracleModeArg, TieBreakArg,
};
use crate::doc::{
    BoundaryDoc, EmbeddingDoc, GeneratedInfo, GraphInfo, MeasureDoc, OracleEntry, ReducedDoc, RefinementInfo,
    ResultDocument,
};
use crate::input::{load_graph, parse_centers, read_file, run_generator, write_file, GenSpec, Generated, LoadedGraph};
use crate::CliError;

/// A finished command: its document plus an optional failure to report
/// after the document has been written.
pub struct Outcome {
    pub document: ResultDocument,
    pub failure: Option<CliError>,
    /// The command already wrote its payload to stdout; print the document
    /// only when it goes to a file.
    pub stdout_taken: bool,
}

impl From<ResultDocument> for Outcome {
    fn from(document: ResultDocument) -> Self {
        Outcome {
            document,
            failure: None,
            stdout_taken: false,
        }
    }
}

/// Records wall-clock milliseconds per stage.
struct Stopwatch {
    last: Instant,
    stages: BTreeMap<String, f64>,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            last: Instant::now(),
            stages: BTreeMap::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        *self.stages.entry(stage.to_string()).or_default() += (now - self.last).as_secs_f64() * 1e3;
        self.last = now;
    }
}

/// Graph, distances and boundary, with the document's graph section.
struct Prepared {
    loaded: LoadedGraph,
    dist: DistanceMatrix,
    boundary: BoundarySet,
    info: GraphInfo,
}

fn prepare(source: &crate::args::GraphSource, clock: &mut Stopwatch) -> Result<Prepared, CliError> {
    let loaded = load_graph(source)?;
    clock.lap("load");
    let dist = all_pairs_distances(&loaded.graph)?;
    clock.lap("distances");
    let boundary = boundary_set(&loaded.graph, &dist);
    clock.lap("boundary");
    let info = GraphInfo {
        source: loaded.label.clone(),
        n: loaded.graph.n(),
        edges: loaded.graph.edge_count(),
        diam: dist.diam(),
        max_degree: loaded.graph.max_degree(),
        boundary_size: boundary.len(),
    };
    Ok(Prepared {
        loaded,
        dist,
        boundary,
        info,
    })
}

pub fn generate(args: &GenerateArgs) -> Result<Outcome, CliError> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")));
    let mut spec = match args.kind {
        GeneratorKind::Path => format!("path:n={}", need(args.n, "n")?),
        GeneratorKind::Cycle => format!("cycle:n={}", need(args.n, "n")?),
        GeneratorKind::Complete => format!("complete:n={}", need(args.n, "n")?),
        GeneratorKind::Star => format!("star:leaves={}", need(args.leaves, "leaves")?),
        GeneratorKind::Grid => format!("grid:rows={},cols={}", need(args.rows, "rows")?, need(args.cols, "cols")?),
        GeneratorKind::GluedPaths => format!("glued-paths:m={},ell={}", need(args.m, "m")?, need(args.ell, "ell")?),
        GeneratorKind::Er => {
            let p = args.p.ok_or_else(|| CliError::Usage("--p is required".into()))?;
            format!("er:n={},p={p},seed={}", need(args.n, "n")?, args.seed)
        }
        GeneratorKind::Gaussian => format!("gaussian:n={},stddev={},seed={}", need(args.n, "n")?, args.stddev, args.seed),
        GeneratorKind::SwissRoll => format!("swiss-roll:n={},seed={}", need(args.n, "n")?, args.seed),
    };
    let generated = if args.kind == GeneratorKind::Gaussian {
        let centers = args
            .centers
            .as_deref()
            .ok_or_else(|| CliError::Usage("--centers is required".into()))?;
        let centers = parse_centers(centers)?;
        let cloud = balanced_core::generators::gen_gaussian_clouds(need(args.n, "n")?, &centers, args.stddev, args.seed)?;
        spec.push_str(&format!(",centers={}", args.centers.as_deref().unwrap_or_default()));
        Generated::Cloud(cloud)
    } else {
        run_generator(&GenSpec::parse(&spec)?)?
    };
    let mut doc = ResultDocument::new("generate");
    doc.config = Some(serde_json::json!({ "spec": spec }));
    let (text, info) = match &generated {
        Generated::Graph(g, glued) => {
            let info = GeneratedInfo {
                kind: spec.split(':').next().unwrap_or_default().to_string(),
                vertices: Some(g.n()),
                edges: Some(g.edge_count()),
                points: None,
                dim: None,
                metadata_columns: Vec::new(),
                hubs: glued.as_ref().map(|gp| gp.hubs),
                midpoints: glued.as_ref().map(|gp| gp.midpoints.clone()).unwrap_or_default(),
                centers: glued.as_ref().map(|gp| gp.centers.clone()).unwrap_or_default(),
            };
            let mut comment = spec.clone();
            if let Some(gp) = glued {
                let mids: Vec<String> = gp.midpoints.iter().map(usize::to_string).collect();
                comment.push_str(&format!("\nhubs: {} {}\nmidpoints: {}", gp.hubs.0, gp.hubs.1, mids.join(" ")));
            }
            (write_edge_list(g, Some(&comment)), info)
        }
        Generated::Cloud(cloud) => {
            let info = GeneratedInfo {
                kind: spec.split(':').next().unwrap_or_default().to_string(),
                vertices: None,
                edges: None,
                points: Some(cloud.len()),
                dim: Some(cloud.dim),
                metadata_columns: cloud.metadata_names.clone(),
                hubs: None,
                midpoints: Vec::new(),
                centers: Vec::new(),
            };
            (write_points(cloud), info)
        }
    };
    doc.generated = Some(info);
    match &args.file {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(Outcome {
        document: doc,
        failure: None,
        stdout_taken: args.file.is_none(),
    })
}

fn pipeline_config(opts: &GreedyOptions) -> PipelineConfig {
    PipelineConfig {
        initial: opts.initial.clone(),
        tie_break: match opts.tie_break {
            TieBreakArg::Smallest => TieBreak::SmallestIndex,
            TieBreakArg::Boundary => TieBreak::PreferBoundary,
            TieBreakArg::Seeded => TieBreak::Seeded(opts.tie_seed),
        },
        run: RunConfig {
            max_steps: opts.max_steps,
            sample_every: opts.sample_every,
            stop_gap: opts.stop_gap,
            min_len: opts.min_len,
            ..RunConfig::default()
        },
        support_eps: opts.support_eps,
        balance_tol: opts.tol,
        repair_iter: opts.repair_iter,
    }
}

fn measure_doc(mu: &VertexMeasure, dist: &DistanceMatrix) -> Result<MeasureDoc, CliError> {
    let mut doc = MeasureDoc::from_measure(mu);
    match energy_exact(mu, dist)? {
        Some(j) => {
            doc.energy = Some(rational_to_f64(&j));
            doc.energy_exact = Some(format_rational(&j));
        }
        None => doc.energy = Some(energy_quadratic(mu, dist)?),
    }
    Ok(doc)
}

/// Runs the greedy pipeline and fills the corresponding document sections.
fn run_greedy(
    prepared: &Prepared,
    opts: &GreedyOptions,
    doc: &mut ResultDocument,
    clock: &mut Stopwatch,
) -> Result<VertexMeasure, CliError> {
    let config = pipeline_config(opts);
    doc.config = Some(serde_json::to_value(&config).expect("config serializes"));
    let outcome = greedy_balanced(&prepared.dist, Some(&prepared.boundary), &config)?;
    clock.lap("greedy");
    if !outcome.convergence.converged {
        doc.warnings.push(format!(
            "greedy did not converge in {} steps (gap {} > {})",
            outcome.convergence.steps, outcome.convergence.gap, outcome.convergence.stop_gap
        ));
    }
    if outcome.source == MeasureSource::Empirical {
        doc.warnings
            .push("refinement failed; reporting the empirical measure unrefined".into());
    }
    if !outcome.balance.is_balanced {
        doc.warnings.push("the reported measure is not balanced".into());
    }
    doc.alpha_estimate = Some(outcome.convergence.alpha_estimate);
    doc.convergence = Some(outcome.convergence);
    doc.refinement = Some(RefinementInfo {
        support_eps: outcome.support_eps,
        candidate_support: outcome.candidate_support,
        source: outcome.source,
        failure: outcome.refine_failure,
    });
    doc.measure = Some(measure_doc(&outcome.measure, &prepared.dist)?);
    doc.balance = Some(outcome.balance);
    Ok(outcome.measure)
}

pub fn greedy(args: &GreedyArgs) -> Result<Outcome, CliError> {
    let mut clock = Stopwatch::start();
    let prepared = prepare(&args.source, &mut clock)?;
    let mut doc = ResultDocument::new("greedy");
    let measure = run_greedy(&prepared, &args.greedy, &mut doc, &mut clock)?;
    doc.uniform_balance = Some(is_balanced(
        &VertexMeasure::uniform(prepared.dist.n())?,
        &prepared.dist,
        DEFAULT_BALANCE_TOL,
    )?);
    clock.lap("balance");
    if let Some(path) = &args.measure_out {
        write_file(path, &write_measure(&measure))?;
    }
    doc.graph = Some(prepared.info);
    doc.timing = clock.stages;
    Ok(doc.into())
}

pub fn balance(args: &BalanceArgs) -> Result<Outcome, CliError> {
    let mut clock = Stopwatch::start();
    let prepared = prepare(&args.source, &mut clock)?;
    let mu = parse_measure(&read_file(&args.measure)?, prepared.dist.n())?;
    let mut doc = ResultDocument::new("balance");
    doc.config = Some(serde_json::json!({ "tol": args.tol, "measure": args.measure.display().to_string() }));
    doc.balance = Some(is_balanced(&mu, &prepared.dist, args.tol)?);
    doc.measure = Some(measure_doc(&mu, &prepared.dist)?);
    clock.lap("balance");
    doc.graph = Some(prepared.info);
    doc.timing = clock.stages;
    Ok(doc.into())
}

fn audit_failures(emb: &EmbeddingDoc) -> Vec<String> {
    let mut failures = Vec::new();
    if emb.lipschitz.violation_count > 0 {
        failures.push(format!(
            "{} pairs violate the Lipschitz bound (max ratio {})",
            emb.lipschitz.violation_count, emb.lipschitz.max_ratio
        ));
    }
    if !emb.hyperplane.satisfied {
        failures.push(format!(
            "support rows deviate from the hyperplane by {}",
            emb.hyperplane.max_support_deviation
        ));
    }
    if !emb.separation.satisfied {
        failures.push(format!(
            "separation {} below the bound {}",
            emb.separation.min_avg_linf, emb.separation.bound
        ));
    }
    if let Some(r) = &emb.reduced {
        if r.lipschitz.violation_count > 0 {
            failures.push(format!(
                "{} pairs violate the Lipschitz bound after dropping coordinates",
                r.lipschitz.violation_count
            ));
        }
    }
    failures
}

pub fn embed(args: &EmbedArgs) -> Result<Outcome, CliError> {
    let mut clock = Stopwatch::start();
    let prepared = prepare(&args.source, &mut clock)?;
    let dist = &prepared.dist;
    let mut doc = ResultDocument::new("embed");
    let mu = match &args.measure {
        Some(path) => {
            let mu = parse_measure(&read_file(path)?, dist.n())?;
            doc.config = Some(serde_json::json!({ "measure": path.display().to_string(), "tol": args.greedy.tol }));
            doc.balance = Some(is_balanced(&mu, dist, args.greedy.tol)?);
            doc.measure = Some(measure_doc(&mu, dist)?);
            mu
        }
        None => run_greedy(&prepared, &args.greedy, &mut doc, &mut clock)?,
    };
    clock.lap("measure");

    let emb = if args.force {
        let emb = embed_unchecked(dist, &mu)?;
        if !is_balanced(&mu, dist, args.greedy.tol)?.is_balanced {
            doc.warnings.push("embedding an unbalanced measure (--force)".into());
        }
        emb
    } else {
        build_embedding(dist, &mu, args.greedy.tol)?
    };
    let lipschitz = lipschitz_audit(&emb, dist)?;
    let hyperplane = hyperplane_check(&emb, dist)?;
    let separation = separation_check(&emb, dist.diam());
    clock.lap("embed_audit");

    let reduced = match (args.drop_below, args.drop_top) {
        (None, None) => None,
        (below, top) => {
            let mut r = emb.clone();
            if let Some(t) = below {
                r = drop_small_coordinates(&r, t)?;
            }
            if let Some(k) = top {
                r = keep_top_coordinates(&r, k)?;
            }
            Some(r)
        }
    };
    let reduced_doc = match &reduced {
        Some(r) => Some(ReducedDoc {
            support: r.support.clone(),
            retained_mass: r.weights.iter().sum(),
            alpha: r.alpha,
            lipschitz: lipschitz_audit(r, dist)?,
        }),
        None => None,
    };
    let working: &Embedding = reduced.as_ref().unwrap_or(&emb);
    let distortion = if args.audit {
        Some(distortion_report(working, dist, args.audit_pairs, args.audit_seed)?)
    } else {
        None
    };
    clock.lap("reduce_audit");

    let mut points = working.to_matrix();
    let mut columns = working.column_labels();
    if args.center {
        points = center_project(&points);
    }
    let mut explained = None;
    if let Some(k) = args.pca_dim {
        let pca = pca_reduce(&points, k)?;
        points = pca.points;
        columns = (1..=k).map(|i| format!("pc{i}")).collect();
        explained = Some(pca.explained_variance_ratio);
    }
    clock.lap("project");

    // rank correlation of the first output column with each point-cloud
    // metadata column, e.g. the roll parameter of a swiss roll
    let mut correlations = BTreeMap::new();
    if let Some(cloud) = &prepared.loaded.cloud {
        if points.ncols() > 0 {
            let first: Vec<f64> = points.column(0).iter().copied().collect();
            for name in &cloud.metadata_names {
                let column = cloud.metadata_column(name).expect("listed metadata column");
                correlations.insert(name.clone(), rank_correlation(&first, &column));
            }
        }
    }

    let rows: Vec<Vec<f64>> = points.row_iter().map(|r| r.iter().copied().collect()).collect();
    if let Some(path) = &args.csv {
        write_file(path, &write_coordinates_csv(&columns, &rows))?;
    }
    let embedding_doc = EmbeddingDoc {
        dim: emb.dim(),
        support: emb.support.clone(),
        alpha: emb.alpha,
        alpha_exact: emb.alpha_exact.as_ref().map(format_rational),
        lipschitz,
        hyperplane,
        separation,
        reduced: reduced_doc,
        distortion,
        pca_explained_variance: explained,
        output_columns: columns,
        centered: args.center,
        metadata_rank_correlation: correlations,
    };
    let failures = audit_failures(&embedding_doc);
    doc.embedding = Some(embedding_doc);
    doc.graph = Some(prepared.info);
    doc.timing = clock.stages;
    let failure = (!failures.is_empty()).then(|| CliError::Guarantee(failures.join("; ")));
    Ok(Outcome {
        document: doc,
        failure,
        stdout_taken: false,
    })
}

pub fn oracle(args: &OracleArgs) -> Result<Outcome, CliError> {
    let mut clock = Stopwatch::start();
    let prepared = prepare(&args.source, &mut clock)?;
    let mode = match args.mode {
        OracleModeArg::Grid => OracleMode::Grid {
            resolution: args.resolution,
        },
        OracleModeArg::Supports => OracleMode::Supports {
            max_size: args.max_size,
        },
    };
    let mut found = brute_force_balanced(&prepared.dist, mode)?;
    clock.lap("oracle");
    found.sort_by(|a, b| b.energy.cmp(&a.energy).then_with(|| a.support.cmp(&b.support)));
    let mut doc = ResultDocument::new("oracle");
    doc.config = Some(serde_json::to_value(mode).expect("mode serializes"));
    doc.oracle = Some(
        found
            .iter()
            .map(|m| OracleEntry {
                support: crate::doc::weight_entries(&m.measure),
                energy: rational_to_f64(&m.energy),
                energy_exact: format_rational(&m.energy),
                argmax_set: m.argmax_set.clone(),
            })
            .collect(),
    );
    doc.graph = Some(prepared.info);
    doc.timing = clock.stages;
    Ok(doc.into())
}

pub fn boundary(args: &BoundaryArgs) -> Result<Outcome, CliError> {
    let mut clock = Stopwatch::start();
    let prepared = prepare(&args.source, &mut clock)?;
    let iso = isoperimetric_report(&prepared.loaded.graph, &prepared.dist, &prepared.boundary);
    let mut doc = ResultDocument::new("boundary");
    let failure = (!iso.satisfied).then(|| CliError::Guarantee("isoperimetric bound violated".into()));
    doc.boundary = Some(BoundaryDoc {
        members: prepared.boundary.members.clone(),
        witnesses: prepared.boundary.witnesses.clone(),
        isoperimetric: iso,
    });
    doc.graph = Some(prepared.info);
    doc.timing = clock.stages;
    Ok(Outcome {
        document: doc,
        failure,
        stdout_taken: false,
    })
}
