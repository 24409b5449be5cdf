use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::Result;
use cgso::centrality::diagonal_for;
use cgso::cgnn::{self, block_features, random_split, Architecture, TrainConfig, TrainData};
use cgso::cgso::{CgsoParams, Preset};
use cgso::clustering::{self, ami, ari, kmeans, spectral_embedding, HeatmapConfig, KMeansConfig, Metric, SpectralClusterConfig};
use cgso::generators::{expected_avg_degree, generate_ba as sample_ba, generate_sbbam as sample_sbbam, BaParams, SbbamParams};
use cgso::rng::{split, split_path};
use cgso::spectral::{cheeger_bruteforce, spectral_report};
use serde_json::json;

use crate::io::{load_graph, read_features, read_labels, read_split, read_text, usage, LoadedGraph};
use crate::{BaArgs, CentralityArgs, CheegerArgs, ClusterArgs, HeatmapArgs, RunOutput, SbbamArgs, SpectrumArgs, TrainArgs};

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn graph_info(g: &LoadedGraph) -> serde_json::Value {
    json!({
        "nodes": g.graph.node_count(),
        "edges": g.graph.edge_count(),
        "nodes_in_file": g.total_nodes,
        "nodes_dropped": g.nodes_dropped(),
        "self_loops_dropped": g.self_loops_dropped,
    })
}

fn node_csv(header: &str, ids: &[u64], values: impl Iterator<Item = String>) -> Vec<u8> {
    let mut out = format!("{header}\n");
    for (id, v) in ids.iter().zip(values) {
        let _ = writeln!(out, "{id},{v}");
    }
    out.into_bytes()
}

pub fn generate_ba(a: &BaArgs) -> Result<RunOutput> {
    let params = BaParams {
        n: a.n,
        n0: a.n0,
        r0: a.r0,
        r: a.r,
        seed: a.seed,
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    let g = sample_ba(&params)?;
    let meta = json!({
        "model": "ba",
        "params": params,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "expected_edges": params.expected_edge_count(),
        "expected_avg_degree": expected_avg_degree(a.n, a.n0, a.r0, a.r),
    });
    Ok(RunOutput {
        files: vec![
            ("edges.txt".into(), g.to_edge_list().into_bytes()),
            ("meta.json".into(), json_bytes(&meta)?),
        ],
        summary: format!("BA graph: {} nodes, {} edges", g.node_count(), g.edge_count()),
        config: json!({ "params": params }),
        seed: Some(a.seed),
        inputs: Vec::new(),
        failure: None,
    })
}

pub fn generate_sbbam(a: &SbbamArgs) -> Result<RunOutput> {
    let params = SbbamParams {
        n0: a.n0,
        r0: a.r0,
        ..SbbamParams::uniform(a.blocks.clone(), a.r.clone(), a.p, a.seed)
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    let (g, truth) = sample_sbbam(&params)?;
    let ids: Vec<u64> = (0..g.node_count() as u64).collect();
    let mut files = vec![
        ("edges.txt".to_string(), g.to_edge_list().into_bytes()),
        (
            "labels.csv".to_string(),
            node_csv("node,label", &ids, truth.labels().iter().map(|l| l.to_string())),
        ),
    ];
    if let Some(sigma) = a.features_sigma {
        let x = block_features(&truth, sigma, split_path(a.seed, &[u64::MAX, 1])).map_err(|e| usage(e.to_string()))?;
        let masks = random_split(g.node_count(), a.train_frac, a.val_frac, split_path(a.seed, &[u64::MAX, 2]))
            .map_err(|e| usage(e.to_string()))?;
        let header: String = (0..x.cols()).fold("node".into(), |h, j| format!("{h},x{j}"));
        let rows = (0..x.rows()).map(|i| x.row(i).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        files.push(("features.csv".into(), node_csv(&header, &ids, rows)));
        let names = (0..masks.len()).map(|i| {
            if masks.train[i] {
                "train"
            } else if masks.val[i] {
                "val"
            } else {
                "test"
            }
            .to_string()
        });
        files.push(("split.csv".into(), node_csv("node,split", &ids, names)));
    }
    let meta = json!({
        "model": "sbbam",
        "params": params,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "block_sizes": truth.sizes(),
        "features_sigma": a.features_sigma,
    });
    files.push(("meta.json".into(), json_bytes(&meta)?));
    Ok(RunOutput {
        files,
        summary: format!(
            "block model: {} nodes in {} blocks, {} edges",
            g.node_count(),
            truth.k(),
            g.edge_count()
        ),
        config: json!({
            "params": params,
            "features_sigma": a.features_sigma,
            "train_frac": a.train_frac,
            "val_frac": a.val_frac,
        }),
        seed: Some(a.seed),
        inputs: Vec::new(),
        failure: None,
    })
}

pub fn centrality(a: &CentralityArgs) -> Result<RunOutput> {
    let g = load_graph(&a.graph.graph, a.graph.whole_graph)?;
    let kind = a.centrality.resolve();
    let values = kind.compute(&g.graph)?.values;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    Ok(RunOutput {
        files: vec![(
            "centrality.csv".into(),
            node_csv("node,value", &g.ids, values.iter().map(|v| v.to_string())),
        )],
        summary: format!(
            "{kind} on {} nodes ({} dropped): min {lo}, max {hi}",
            g.graph.node_count(),
            g.nodes_dropped()
        ),
        config: json!({ "centrality": kind, "whole_graph": a.graph.whole_graph }),
        seed: None,
        inputs: vec![a.graph.graph.clone()],
        failure: None,
    })
}

pub fn spectrum(a: &SpectrumArgs) -> Result<RunOutput> {
    let g = load_graph(&a.graph.graph, a.graph.whole_graph)?;
    let kind = a.centrality.resolve();
    let v = diagonal_for(&g.graph, kind)?;
    let report = spectral_report(&g.graph, &v, a.e2, a.e3)?;
    let summary = format!(
        "{} eigenvalues, radius {:.6}, row-sum bound {:.6} ({}), gamma {:.6}",
        report.eigenvalues.len(),
        report.spectral_radius,
        report.gershgorin_bound,
        if report.gershgorin_bound_holds { "holds" } else { "violated" },
        report.gamma
    );
    let out = json!({ "graph": graph_info(&g), "report": report });
    Ok(RunOutput {
        files: vec![("spectrum.json".into(), json_bytes(&out)?)],
        summary,
        config: json!({ "centrality": kind, "e2": a.e2, "e3": a.e3, "whole_graph": a.graph.whole_graph }),
        seed: None,
        inputs: vec![a.graph.graph.clone()],
        failure: None,
    })
}

pub fn cheeger(a: &CheegerArgs) -> Result<RunOutput> {
    let g = load_graph(&a.graph.graph, a.graph.whole_graph)?;
    let kind = a.centrality.resolve();
    let v = diagonal_for(&g.graph, kind)?;
    let mut report = cheeger_bruteforce(&g.graph, &v)?;
    for variant in [&mut report.vertex, &mut report.edge] {
        for node in variant.argmin.iter_mut() {
            *node = g.ids[*node] as usize;
        }
    }
    let summary = format!(
        "lambda1 {:.6}; edge h {:.6} (bound {:.6}, {}); vertex h {:.6} (bound {:.6}, {})",
        report.lambda1,
        report.edge.h,
        report.edge.bound_rhs,
        if report.edge.holds { "holds" } else { "violated" },
        report.vertex.h,
        report.vertex.bound_rhs,
        if report.vertex.holds { "holds" } else { "violated" },
    );
    let out = json!({ "graph": graph_info(&g), "centrality": kind, "report": report });
    Ok(RunOutput {
        files: vec![("cheeger.json".into(), json_bytes(&out)?)],
        summary,
        config: json!({ "centrality": kind, "whole_graph": a.graph.whole_graph }),
        seed: None,
        inputs: vec![a.graph.graph.clone()],
        failure: None,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn cluster(a: &ClusterArgs) -> Result<RunOutput> {
    if a.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let g = load_graph(&a.graph.graph, a.graph.whole_graph)?;
    let truth = a.labels.as_deref().map(|p| read_labels(p, &g)).transpose()?;
    let c = match (a.clusters, &truth) {
        (Some(c), _) => c,
        (None, Some(t)) => t.k(),
        (None, None) => return Err(usage("--C is required when no --labels are given")),
    };
    let kind = a.centrality.resolve();
    let v = diagonal_for(&g.graph, kind)?;
    let embedding = spectral_embedding(&g.graph, &v, a.e2, a.e3, c, a.selection.into())?;
    let mut runs = Vec::with_capacity(a.repeats);
    let mut first = None;
    for r in 0..a.repeats {
        let p = kmeans(&embedding, c, split(a.seed, r as u64), KMeansConfig::default())?.partition;
        let scores = match &truth {
            Some(t) => Some((ami(&p, t)?, ari(&p, t)?)),
            None => None,
        };
        runs.push(scores);
        first.get_or_insert(p);
    }
    let scored: Vec<(f64, f64)> = runs.iter().flatten().copied().collect();
    let stats = (!scored.is_empty()).then(|| {
        let (am, asd) = mean_std(&scored.iter().map(|s| s.0).collect::<Vec<_>>());
        let (rm, rsd) = mean_std(&scored.iter().map(|s| s.1).collect::<Vec<_>>());
        json!({ "ami_mean": am, "ami_std": asd, "ari_mean": rm, "ari_std": rsd })
    });
    let summary = match &stats {
        Some(s) => format!(
            "{c} clusters, {} repeats: AMI {:.4} ± {:.4}, ARI {:.4} ± {:.4}",
            a.repeats, s["ami_mean"], s["ami_std"], s["ari_mean"], s["ari_std"]
        ),
        None => format!("{c} clusters, {} repeats (no ground truth)", a.repeats),
    };
    let result = json!({
        "graph": graph_info(&g),
        "centrality": kind,
        "e2": a.e2,
        "e3": a.e3,
        "clusters": c,
        "repeats": a.repeats,
        "seed": a.seed,
        "scores": stats,
        "per_repeat": runs.iter().map(|s| s.map(|(x, y)| json!({ "ami": x, "ari": y }))).collect::<Vec<_>>(),
    });
    let first = first.expect("at least one repeat");
    let mut inputs = vec![a.graph.graph.clone()];
    inputs.extend(a.labels.clone());
    Ok(RunOutput {
        files: vec![
            ("cluster.json".into(), json_bytes(&result)?),
            (
                "assignments.csv".into(),
                node_csv("node,cluster", &g.ids, first.labels().iter().map(|l| l.to_string())),
            ),
        ],
        summary,
        config: json!({
            "centrality": kind, "e2": a.e2, "e3": a.e3, "clusters": c, "repeats": a.repeats,
            "whole_graph": a.graph.whole_graph,
        }),
        seed: Some(a.seed),
        inputs,
        failure: None,
    })
}

pub fn heatmap(a: &HeatmapArgs) -> Result<RunOutput> {
    let g = load_graph(&a.graph.graph, a.graph.whole_graph)?;
    let truth = read_labels(&a.labels, &g)?;
    let kind = a.centrality.resolve();
    let v = diagonal_for(&g.graph, kind)?;
    let cfg = HeatmapConfig {
        e2_range: (a.e2_min, a.e2_max),
        e3_range: (a.e3_min, a.e3_max),
        steps: a.steps,
        repeats: a.repeats,
        seed: a.seed,
        clustering: SpectralClusterConfig {
            selection: a.selection.into(),
            kmeans: KMeansConfig::default(),
        },
    };
    if a.steps == 0 || a.repeats == 0 {
        return Err(usage("--steps and --repeats must be at least 1"));
    }
    let grid = clustering::heatmap(&g.graph, &v, &truth, &cfg)?;
    let (mut best, mut at) = (f64::NEG_INFINITY, (0.0, 0.0));
    for (i, row) in grid.ami_mean.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x > best {
                best = x;
                at = (grid.e2_values[i], grid.e3_values[j]);
            }
        }
    }
    let out = json!({ "graph": graph_info(&g), "centrality": kind, "grid": grid });
    Ok(RunOutput {
        files: vec![
            ("ami.csv".into(), grid.to_csv(Metric::Ami).into_bytes()),
            ("ari.csv".into(), grid.to_csv(Metric::Ari).into_bytes()),
            ("heatmap.json".into(), json_bytes(&out)?),
        ],
        summary: format!(
            "{0}x{0} grid, {1} repeats: best mean AMI {best:.4} at (e2, e3) = ({2}, {3})",
            a.steps, a.repeats, at.0, at.1
        ),
        config: json!({ "centrality": kind, "heatmap": cfg, "whole_graph": a.graph.whole_graph }),
        seed: Some(a.seed),
        inputs: vec![a.graph.graph.clone(), a.labels.clone()],
        failure: None,
    })
}

fn apply_gso(cfg: &mut TrainConfig, spec: &str, inputs: &mut Vec<std::path::PathBuf>) -> Result<()> {
    if let Some(name) = spec.strip_prefix("preset:") {
        cfg.preset = Preset::from_str(name).map_err(|e| usage(e.to_string()))?;
        cfg.init_params = None;
    } else if let Some(file) = spec.strip_prefix("params:") {
        let path = Path::new(file);
        let params = CgsoParams::from_json(&read_text(path)?).map_err(|e| usage(format!("{file}: {e}")))?;
        cfg.init_params = Some(params);
        inputs.push(path.to_path_buf());
    } else {
        return Err(usage(format!("--gso expects preset:NAME or params:FILE, got '{spec}'")));
    }
    Ok(())
}

pub fn train(a: &TrainArgs) -> Result<RunOutput> {
    let mut inputs = vec![a.graph.graph.clone(), a.features.clone(), a.labels.clone(), a.mask.clone()];
    let mut cfg = match &a.config {
        Some(path) => {
            inputs.push(path.clone());
            TrainConfig::from_json(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => TrainConfig::default(),
    };
    if let Some(spec) = &a.gso {
        apply_gso(&mut cfg, spec, &mut inputs)?;
    }
    if !a.centralities.is_empty() {
        cfg.centralities = a.centralities.iter().map(|k| k.with(a.walk_length, a.damping)).collect();
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(hops) = a.sgc_hops {
        cfg.architecture = Architecture::Csgc { hops };
    }
    if a.freeze_operator {
        cfg.learn_operator = false;
    }
    if a.dirichlet {
        cfg.dirichlet_probe = true;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let g = load_graph(&a.graph.graph, a.graph.whole_graph)?;
    let x = read_features(&a.features, &g)?;
    let labels = read_labels(&a.labels, &g)?;
    let masks = read_split(&a.mask, &g)?;
    let data = TrainData::new(x, labels.labels().to_vec(), masks).map_err(|e| usage(e.to_string()))?;
    let report = cgnn::train(&g.graph, &data, &cfg)?;

    let mut table = String::from("term,centrality,m1,m2,m3,e1,e2,e3,a\n");
    for (t, op) in report.operators.iter().enumerate() {
        let name = op.centrality.map_or("custom", |c| c.name());
        let p = op.params.to_array().map(|v| format!("{v:.6}")).join(",");
        let _ = writeln!(table, "{t},{name},{p}");
    }
    let summary = format!(
        "best epoch {} of {}: val accuracy {:.4}, test accuracy {:.4}{}",
        report.best_epoch,
        report.train_loss.len(),
        report.best_val_accuracy,
        report.test_accuracy,
        if report.diverged { " (diverged)" } else { "" }
    );
    let out = json!({ "graph": graph_info(&g), "config": cfg, "report": report });
    Ok(RunOutput {
        files: vec![
            ("report.json".to_string(), json_bytes(&out)?),
            ("operators.csv".to_string(), table.into_bytes()),
        ],
        failure: report.diverged.then(|| "training diverged (non-finite loss)".to_string()),
        summary,
        config: serde_json::to_value(&cfg)?,
        seed: Some(cfg.seed),
        inputs,
    })
}
