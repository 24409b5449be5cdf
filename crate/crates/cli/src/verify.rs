use std::fmt::Write as _;

use anyhow::Result;
use cgso::centrality::{diagonal_for, Centrality};
use cgso::cgnn::{Model, OperatorTerm, PARAM_NAMES};
use cgso::cgso::{build_parametrized, markov_operator, CgsoParams, Preset};
use cgso::clustering::{ami, ari};
use cgso::eigen::{general_eigenvalues, symmetric_eigenvalues};
use cgso::generators::{expected_avg_degree, generate_ba, BaParams};
use cgso::graph::Graph;
use cgso::linalg::DenseMatrix;
use cgso::partition::Partition;
use cgso::rng::{rng_from_seed, split, Rng};
use cgso::spectral::{analytic_moments, cheeger_bruteforce, eigenvalue_bounds, spectrum_moments};
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::{RunOutput, Suite, VerifyArgs};

struct Check {
    suite: &'static str,
    name: &'static str,
    tol: f64,
    cases: usize,
    worst: f64,
    failures: usize,
}

impl Check {
    fn new(suite: &'static str, name: &'static str, tol: f64) -> Self {
        Self {
            suite,
            name,
            tol,
            cases: 0,
            worst: 0.0,
            failures: 0,
        }
    }

    /// Record one case by its error; NaN counts as a failure.
    fn record(&mut self, err: f64) {
        self.cases += 1;
        if err.is_nan() || err > self.tol {
            self.failures += 1;
        }
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
    }

    fn flag(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { f64::INFINITY });
    }

    fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn random_connected(n: usize, p: f64, rng: &mut Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (order[k], order[rng.random_range(0..k)])).collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).expect("valid edges")
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn spectral(cases: usize, seed: u64) -> Result<Vec<Check>> {
    let mut adjoint = Check::new("spectral", "V M symmetric (self-adjoint in <.,.>_V)", 1e-10);
    let mut real = Check::new("spectral", "Markov spectrum is real", 1e-8);
    let mut solvers = Check::new("spectral", "symmetric vs general eigensolver", 1e-8);
    let mut moments = Check::new("spectral", "closed-form moments", 1e-8);
    let mut gersh = Check::new("spectral", "radius <= max deg/v", 0.0);
    let mut gamma = Check::new("spectral", "radius <= gamma when gamma >= 1", 0.0);
    let mut cheeger = Check::new("spectral", "weighted Cheeger bound (edge boundary)", 0.0);
    for case in 0..cases {
        let mut rng = rng_from_seed(split(seed, case as u64));
        let n = rng.random_range(3..=10);
        let g = random_connected(n, rng.random_range(0.1..0.6), &mut rng);
        for kind in Centrality::all_default() {
            let v = diagonal_for(&g, kind)?;
            let m = markov_operator(&g, &v)?.materialize_dense()?;
            let vm = DenseMatrix::from_diagonal(v.entries()).matmul(&m)?;
            adjoint.record(vm.max_asymmetry());

            let general = general_eigenvalues(&m)?;
            real.record(general.iter().fold(0.0f64, |acc, &(_, im)| acc.max(im.abs())));

            let mut re: Vec<f64> = general.iter().map(|&(r, _)| r).collect();
            re.sort_by(f64::total_cmp);
            // V^-1/2 A V^-1/2 is similar to V^-1 A and symmetric
            let h = rng.random_range(-1.5..1.5);
            let sym = build_parametrized(&g, &v, CgsoParams::middle(-0.5, -0.5))?.materialize_dense()?;
            let mut sym_vals = symmetric_eigenvalues(&sym)?;
            sym_vals.sort_by(f64::total_cmp);
            solvers.record(max_diff(&re, &sym_vals));
            let other = build_parametrized(&g, &v, CgsoParams::middle(h, h))?.materialize_dense()?;
            let mut a: Vec<f64> = symmetric_eigenvalues(&other)?;
            let mut b: Vec<f64> = general_eigenvalues(&other)?.iter().map(|&(r, _)| r).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            let scale = a.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            solvers.record(max_diff(&a, &b) / scale);

            let closed = analytic_moments(&g, &v)?;
            let (mean, std) = spectrum_moments(&re);
            moments.record((closed.mean - mean).abs().max((closed.std - std).abs()));

            let bounds = eigenvalue_bounds(&g, &v)?;
            gersh.flag(bounds.gershgorin_holds);
            if bounds.gamma_applicable {
                gamma.flag(bounds.gamma_holds);
            }
            if n <= 8 {
                cheeger.flag(cheeger_bruteforce(&g, &v)?.edge.holds);
            }
        }
    }
    Ok(vec![adjoint, real, solvers, moments, gersh, gamma, cheeger])
}

fn lemma(cases: usize, seed: u64) -> Result<Vec<Check>> {
    let mut edges = Check::new("lemma", "BA edge count r0 + r (n - n0)", 0.0);
    let mut avg = Check::new("lemma", "BA average degree formula", 1e-12);
    for case in 0..cases {
        let mut rng = rng_from_seed(split(seed, case as u64));
        let n0 = rng.random_range(3..=8);
        let p = BaParams {
            n: n0 + rng.random_range(1..=60),
            n0,
            r0: rng.random_range(0..=n0 * (n0 - 1) / 2),
            r: rng.random_range(1..=n0),
            seed: rng.random(),
        };
        let g = generate_ba(&p)?;
        edges.flag(g.edge_count() == p.expected_edge_count());
        let measured = 2.0 * g.edge_count() as f64 / p.n as f64;
        avg.record((measured - expected_avg_degree(p.n, p.n0, p.r0, p.r)).abs());
    }
    Ok(vec![edges, avg])
}

fn gradients(cases: usize, seed: u64) -> Result<Vec<Check>> {
    const H: f64 = 1e-6;
    let mut weights = Check::new("gradients", "weight gradients vs central differences", 1e-5);
    let mut scalars = Check::new("gradients", "operator scalar gradients vs central differences", 1e-5);
    for case in 0..cases {
        let mut rng = rng_from_seed(split(seed, case as u64));
        let n = rng.random_range(4..=9);
        let g = random_connected(n, 0.3, &mut rng);
        let (d, classes) = (3, 2);
        let x = DenseMatrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        let mask: Vec<bool> = (0..n).map(|i| i % 3 != 2).collect();
        let mut terms = Vec::new();
        for (t, kind) in [Centrality::Degree, Centrality::KCore].into_iter().enumerate() {
            let mut p = Preset::ALL[rng.random_range(0..Preset::ALL.len())].params().to_array();
            for (k, value) in p.iter_mut().enumerate() {
                // keep the scalars away from zero so every path carries gradient
                *value += rng.random_range(-0.3..0.3) + if k < 3 { 0.2 * (t + 1) as f64 } else { 0.0 };
            }
            terms.push(OperatorTerm {
                centrality: diagonal_for(&g, kind)?,
                params: CgsoParams::from_array(p),
            });
        }
        let model = Model::cgcn(&[d, 4, classes], terms, 0.0, rng.random())?;
        let loss = |m: &Model| m.loss(&g, &x, &labels, &mask, false, 0);
        let (_, grads) = model.loss_and_grads(&g, &x, &labels, &mask, false, 0)?;

        for l in 0..model.weights.len() {
            let len = model.weights[l].as_slice().len();
            for idx in [0, len / 2, len - 1] {
                let mut plus = model.clone();
                plus.weights[l].as_mut_slice()[idx] += H;
                let mut minus = model.clone();
                minus.weights[l].as_mut_slice()[idx] -= H;
                let fd = (loss(&plus)? - loss(&minus)?) / (2.0 * H);
                let an = grads.weights[l].as_slice()[idx];
                weights.record((fd - an).abs() / an.abs().max(1.0));
            }
        }
        for t in 0..model.terms.len() {
            for k in 0..PARAM_NAMES.len() {
                let shifted = |delta: f64| {
                    let mut m = model.clone();
                    let mut p = m.terms[t].params.to_array();
                    p[k] += delta;
                    m.terms[t].params = CgsoParams::from_array(p);
                    m
                };
                let fd = (loss(&shifted(H))? - loss(&shifted(-H))?) / (2.0 * H);
                let an = grads.operator[t][k];
                scalars.record((fd - an).abs() / an.abs().max(1.0));
            }
        }
    }
    Ok(vec![weights, scalars])
}

fn clustering(cases: usize, seed: u64) -> Result<Vec<Check>> {
    let mut relabel = Check::new("clustering", "AMI = ARI = 1 under relabelling", 1e-12);
    let mut symmetric = Check::new("clustering", "AMI and ARI symmetric", 1e-12);
    let mut bounded = Check::new("clustering", "AMI <= 1 and ARI <= 1", 0.0);
    for case in 0..cases {
        let mut rng = rng_from_seed(split(seed, case as u64));
        let n = rng.random_range(2..=40);
        let k = rng.random_range(1..=n.min(6));
        let a = Partition::from_raw(&(0..n).map(|_| rng.random_range(0..k)).collect::<Vec<_>>());
        let b = Partition::from_raw(&(0..n).map(|_| rng.random_range(0..k)).collect::<Vec<_>>());
        let mut perm: Vec<usize> = (0..a.k()).collect();
        perm.shuffle(&mut rng);
        let relabelled = Partition::new(a.labels().iter().map(|&l| perm[l]).collect())?;
        relabel.record((ami(&a, &relabelled)? - 1.0).abs().max((ari(&a, &relabelled)? - 1.0).abs()));
        let (ab, ba) = (ami(&a, &b)?, ami(&b, &a)?);
        let (rab, rba) = (ari(&a, &b)?, ari(&b, &a)?);
        symmetric.record((ab - ba).abs().max((rab - rba).abs()));
        bounded.flag(ab <= 1.0 + 1e-12 && rab <= 1.0 + 1e-12);
    }
    Ok(vec![relabel, symmetric, bounded])
}

pub fn run(args: &VerifyArgs) -> Result<RunOutput> {
    let (cases, seed) = (args.cases.max(1), args.seed);
    let suites: &[Suite] = match args.suite {
        Suite::All => &[Suite::Spectral, Suite::Lemma, Suite::Gradients, Suite::Clustering],
        ref one => std::slice::from_ref(one),
    };
    let mut checks = Vec::new();
    for (i, suite) in suites.iter().enumerate() {
        let s = split(seed, i as u64);
        checks.extend(match suite {
            Suite::Spectral => spectral(cases, s)?,
            Suite::Lemma => lemma(cases, s)?,
            Suite::Gradients => gradients(cases, s)?,
            Suite::Clustering => clustering(cases, s)?,
            Suite::All => unreachable!("expanded above"),
        });
    }

    let mut table = String::new();
    writeln!(table, "{:<11} {:<50} {:>6} {:>11} {:>9}  status", "suite", "check", "cases", "max error", "tol")?;
    for c in &checks {
        writeln!(
            table,
            "{:<11} {:<50} {:>6} {:>11.3e} {:>9.1e}  {}",
            c.suite,
            c.name,
            c.cases,
            c.worst,
            c.tol,
            if c.passed() { "PASS" } else { "FAIL" }
        )?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    let summary = format!("{} of {} checks passed", checks.len() - failed.len(), checks.len());
    Ok(RunOutput {
        files: vec![("verify.txt".into(), table.into_bytes())],
        summary,
        failure: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join("; "))),
        config: serde_json::json!({ "cases": cases }),
        seed: Some(seed),
        inputs: Vec::new(),
    })
}
