//! Spectra of centrality operators and the executable spectral checks:
//! self-adjointness, analytic moments, eigenvalue bounds, spectral gap and
//! the centrality-weighted Cheeger inequality.

use serde::{Deserialize, Serialize};

use crate::centrality::{Centrality, DiagonalCentrality};
use crate::cgso::{build_parametrized, dense_limit, markov_operator, CgsoParams};
use crate::eigen::{
    canonical_sign, symmetric_eigen, symmetric_eigenvalues, symmetric_top_eigen, Selection,
    SymmetricEigen,
};
use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};
use crate::linalg::DenseMatrix;

/// Relative tolerance used when comparing a bound against a computed value.
pub const BOUND_TOL: f64 = 1e-8;
pub const CHEEGER_MAX_NODES: usize = 16;

fn check_dense(g: &Graph, v: &DiagonalCentrality) -> Result<()> {
    let n = g.node_count();
    if v.len() != n {
        return Err(Error::Shape(format!(
            "centrality has {} entries for a graph on {n} nodes",
            v.len()
        )));
    }
    let limit = dense_limit();
    if n > limit {
        return Err(Error::DenseLimitExceeded { n, limit });
    }
    Ok(())
}

/// Symmetric `V^s A V^s`, similar to `V^e2 A V^e3` when `s = (e2 + e3) / 2`.
fn symmetrized(g: &Graph, v: &DiagonalCentrality, s: f64) -> Result<DenseMatrix> {
    check_dense(g, v)?;
    build_parametrized(g, v, CgsoParams::middle(s, s))?.materialize_dense()
}

fn to_operator_basis(eig: &mut SymmetricEigen, v: &DiagonalCentrality, t: f64) {
    if t == 0.0 {
        return;
    }
    let scale = v.powf(t);
    let (n, k) = eig.vectors.shape();
    for j in 0..k {
        let mut col: Vec<f64> = (0..n).map(|i| scale[i] * eig.vectors[(i, j)]).collect();
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        col.iter_mut().for_each(|x| *x /= norm);
        canonical_sign(&mut col);
        for (i, x) in col.into_iter().enumerate() {
            eig.vectors[(i, j)] = x;
        }
    }
}

fn reverse_order(eig: SymmetricEigen) -> SymmetricEigen {
    let (n, k) = eig.vectors.shape();
    let mut vectors = DenseMatrix::zeros(n, k);
    for j in 0..k {
        for i in 0..n {
            vectors[(i, j)] = eig.vectors[(i, k - 1 - j)];
        }
    }
    SymmetricEigen {
        values: eig.values.into_iter().rev().collect(),
        vectors,
    }
}

/// Eigenpairs of `V^e2 A V^e3`, eigenvalues descending. Vectors are unit
/// length with the first non-negligible component positive.
pub fn cgso_eigs(g: &Graph, v: &DiagonalCentrality, e2: f64, e3: f64) -> Result<SymmetricEigen> {
    let s = symmetrized(g, v, 0.5 * (e2 + e3))?;
    let mut eig = reverse_order(symmetric_eigen(&s)?);
    to_operator_basis(&mut eig, v, 0.5 * (e2 - e3));
    Ok(eig)
}

/// The `k` leading eigenpairs of `V^e2 A V^e3` under `selection`.
pub fn cgso_top_eigs(
    g: &Graph,
    v: &DiagonalCentrality,
    e2: f64,
    e3: f64,
    k: usize,
    selection: Selection,
) -> Result<SymmetricEigen> {
    let s = symmetrized(g, v, 0.5 * (e2 + e3))?;
    let mut eig = symmetric_top_eigen(&s, k, selection)?;
    to_operator_basis(&mut eig, v, 0.5 * (e2 - e3));
    Ok(eig)
}

/// Eigenvalues of `V^e2 A V^e3`, descending.
pub fn cgso_eigenvalues(g: &Graph, v: &DiagonalCentrality, e2: f64, e3: f64) -> Result<Vec<f64>> {
    let s = symmetrized(g, v, 0.5 * (e2 + e3))?;
    let mut values = symmetric_eigenvalues(&s)?;
    values.reverse();
    Ok(values)
}

/// Eigenvalues of the Markov operator `V^-1 A`, descending.
pub fn markov_eigenvalues(g: &Graph, v: &DiagonalCentrality) -> Result<Vec<f64>> {
    cgso_eigenvalues(g, v, -1.0, 0.0)
}

/// Closed-form spectral moments of `V^-1 A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `trace(V^-1 A) / n`; zero on simple graphs.
    pub mean: f64,
    /// `sqrt(trace((V^-1 A)^2) / n - mean^2)`.
    pub std: f64,
    /// `(1/n) Σ 1/v(i)`: the trace mean if every node carried a self-loop.
    pub self_loop_mean: f64,
}

pub fn analytic_moments(g: &Graph, v: &DiagonalCentrality) -> Result<Moments> {
    let n = g.node_count();
    if v.len() != n {
        return Err(Error::Shape(format!(
            "centrality has {} entries for a graph on {n} nodes",
            v.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let vals = v.entries();
    let nf = n as f64;
    // no stored self-loops, so the diagonal of V^-1 A is zero
    let mean = 0.0;
    let second: f64 = (0..n)
        .map(|i| g.neighbors(i).iter().map(|&j| 1.0 / (vals[i] * vals[j])).sum::<f64>())
        .sum::<f64>()
        / nf;
    let self_loop_mean = vals.iter().map(|x| 1.0 / x).sum::<f64>() / nf;
    Ok(Moments {
        mean,
        std: (second - mean * mean).max(0.0).sqrt(),
        self_loop_mean,
    })
}

/// Mean and population standard deviation of a spectrum.
pub fn spectrum_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Default tolerance for "non-zero" eigenvalues of `I - M`.
pub fn default_zero_tol(values: &[f64]) -> f64 {
    1e-8 * values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Smallest eigenvalue of `I - V^-1 A` above `zero_tol` (default: `1e-8`
/// times the largest magnitude), with the tolerance actually used.
pub fn spectral_gap(g: &Graph, v: &DiagonalCentrality, zero_tol: Option<f64>) -> Result<(f64, f64)> {
    let markov = markov_eigenvalues(g, v)?;
    gap_from_markov(&markov, zero_tol)
}

fn gap_from_markov(markov: &[f64], zero_tol: Option<f64>) -> Result<(f64, f64)> {
    let mut shifted: Vec<f64> = markov.iter().map(|m| 1.0 - m).collect();
    shifted.sort_by(f64::total_cmp);
    let tol = zero_tol.unwrap_or_else(|| default_zero_tol(&shifted));
    shifted
        .iter()
        .copied()
        .find(|&x| x > tol)
        .map(|gap| (gap, tol))
        .ok_or(Error::DegenerateSpectrum { zero_tol: tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueBounds {
    /// `min_i v(i) / deg(i)`
    pub gamma: f64,
    /// `max_i deg(i) / v(i)`, the maximal absolute row sum of `V^-1 A`.
    pub gershgorin: f64,
    pub spectral_radius: f64,
    pub gershgorin_holds: bool,
    /// The `gamma` bound is only claimed when `gamma >= 1`.
    pub gamma_applicable: bool,
    pub gamma_holds: bool,
}

pub fn eigenvalue_bounds(g: &Graph, v: &DiagonalCentrality) -> Result<EigenvalueBounds> {
    let markov = markov_eigenvalues(g, v)?;
    bounds_from_markov(g, v, &markov)
}

fn bounds_from_markov(g: &Graph, v: &DiagonalCentrality, markov: &[f64]) -> Result<EigenvalueBounds> {
    if let Some(node) = g.isolated_nodes().next() {
        return Err(Error::IsolatedNode { node });
    }
    let vals = v.entries();
    let mut gamma = f64::INFINITY;
    let mut gershgorin: f64 = 0.0;
    for (i, &vi) in vals.iter().enumerate() {
        let d = g.degree(i) as f64;
        gamma = gamma.min(vi / d);
        gershgorin = gershgorin.max(d / vi);
    }
    let spectral_radius = markov.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gamma_applicable = gamma >= 1.0;
    Ok(EigenvalueBounds {
        gamma,
        gershgorin,
        spectral_radius,
        gershgorin_holds: spectral_radius <= gershgorin + BOUND_TOL,
        gamma_applicable,
        gamma_holds: spectral_radius <= gamma + BOUND_TOL,
    })
}

/// Everything the spectral module knows about one (graph, centrality) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub nodes: usize,
    pub edges: usize,
    pub centrality: Option<Centrality>,
    pub e2: f64,
    pub e3: f64,
    /// Eigenvalues of `V^e2 A V^e3`, descending.
    pub eigenvalues: Vec<f64>,
    pub analytic_mean: f64,
    pub analytic_std: f64,
    pub self_loop_mean: f64,
    /// Moments of the computed spectrum of `V^-1 A`.
    pub eigen_mean: f64,
    pub eigen_std: f64,
    pub gamma: f64,
    pub gershgorin_bound: f64,
    pub spectral_radius: f64,
    pub gamma_bound_applicable: bool,
    pub gamma_bound_holds: bool,
    pub gershgorin_bound_holds: bool,
    pub spectral_gap_lambda1: Option<f64>,
    pub zero_tolerance: f64,
    pub connected: bool,
}

pub fn spectral_report(g: &Graph, v: &DiagonalCentrality, e2: f64, e3: f64) -> Result<SpectralReport> {
    let markov = markov_eigenvalues(g, v)?;
    let eigenvalues = if e2 == -1.0 && e3 == 0.0 {
        markov.clone()
    } else {
        cgso_eigenvalues(g, v, e2, e3)?
    };
    let moments = analytic_moments(g, v)?;
    let (eigen_mean, eigen_std) = spectrum_moments(&markov);
    let bounds = bounds_from_markov(g, v, &markov)?;
    let (gap, zero_tolerance) = match gap_from_markov(&markov, None) {
        Ok((gap, tol)) => (Some(gap), tol),
        Err(Error::DegenerateSpectrum { zero_tol }) => (None, zero_tol),
        Err(e) => return Err(e),
    };
    Ok(SpectralReport {
        nodes: g.node_count(),
        edges: g.edge_count(),
        centrality: v.kind(),
        e2,
        e3,
        eigenvalues,
        analytic_mean: moments.mean,
        analytic_std: moments.std,
        self_loop_mean: moments.self_loop_mean,
        eigen_mean,
        eigen_std,
        gamma: bounds.gamma,
        gershgorin_bound: bounds.gershgorin,
        spectral_radius: bounds.spectral_radius,
        gamma_bound_applicable: bounds.gamma_applicable,
        gamma_bound_holds: bounds.gamma_holds,
        gershgorin_bound_holds: bounds.gershgorin_holds,
        spectral_gap_lambda1: gap,
        zero_tolerance,
        connected: connected_components(g).component_count == 1,
    })
}

/// Minimizer of one boundary variant of the weighted Cheeger ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerVariant {
    pub h: f64,
    pub argmin: Vec<usize>,
    pub boundary: usize,
    pub mass: f64,
    pub bound_rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerReport {
    /// Boundary counted as vertices outside `U` adjacent to `U`.
    pub vertex: CheegerVariant,
    /// Boundary counted as edges leaving `U`.
    pub edge: CheegerVariant,
    pub lambda1: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub total_mass: f64,
    /// `2 N v_max^2 / v_min`; the bound is this factor times `h`.
    pub factor: f64,
}

/// Exhaustive weighted Cheeger constants over all `U` with
/// `|U|_v <= |V|_v / 2`, and the gap bound `λ1 <= 2 N v₊²/v₋ h` for both.
pub fn cheeger_bruteforce(g: &Graph, v: &DiagonalCentrality) -> Result<CheegerReport> {
    let n = g.node_count();
    if n > CHEEGER_MAX_NODES {
        return Err(Error::TooManyNodes {
            n,
            max: CHEEGER_MAX_NODES,
        });
    }
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let comps = connected_components(g).component_count;
    if comps > 1 {
        return Err(Error::Disconnected { components: comps });
    }
    if let Some(node) = g.isolated_nodes().next() {
        return Err(Error::IsolatedNode { node });
    }
    if v.len() != n {
        return Err(Error::Shape(format!(
            "centrality has {} entries for a graph on {n} nodes",
            v.len()
        )));
    }
    let vals = v.entries();
    let total: f64 = vals.iter().sum();
    let half = 0.5 * total * (1.0 + 1e-12);
    let masks: Vec<u32> = (0..n)
        .map(|i| g.neighbors(i).iter().fold(0u32, |m, &j| m | (1 << j)))
        .collect();

    let mut best_vertex = (f64::INFINITY, 0u32, 0usize, 0.0);
    let mut best_edge = (f64::INFINITY, 0u32, 0usize, 0.0);
    for set in 1u32..(1u32 << n) {
        let mut mass = 0.0;
        let mut reach = 0u32;
        let mut cut = 0usize;
        for i in 0..n {
            if set & (1 << i) != 0 {
                mass += vals[i];
                reach |= masks[i];
                cut += (masks[i] & !set).count_ones() as usize;
            }
        }
        if mass > half {
            continue;
        }
        let outer = (reach & !set).count_ones() as usize;
        let hv = outer as f64 / mass;
        let he = cut as f64 / mass;
        if hv < best_vertex.0 {
            best_vertex = (hv, set, outer, mass);
        }
        if he < best_edge.0 {
            best_edge = (he, set, cut, mass);
        }
    }

    let (lambda1, _) = spectral_gap(g, v, None)?;
    let (v_min, v_max) = (v.min(), v.max());
    let factor = 2.0 * n as f64 * v_max * v_max / v_min;
    let variant = |(h, set, boundary, mass): (f64, u32, usize, f64)| {
        let bound_rhs = factor * h;
        CheegerVariant {
            h,
            argmin: (0..n).filter(|i| set & (1 << i) != 0).collect(),
            boundary,
            mass,
            bound_rhs,
            holds: lambda1 <= bound_rhs + BOUND_TOL * bound_rhs.abs().max(1.0),
        }
    };
    Ok(CheegerReport {
        vertex: variant(best_vertex),
        edge: variant(best_edge),
        lambda1,
        v_min,
        v_max,
        total_mass: total,
        factor,
    })
}

/// `V (V^-1 A)` materialized; symmetric exactly when `M` is self-adjoint in
/// the `V`-weighted inner product.
pub fn weighted_markov(g: &Graph, v: &DiagonalCentrality) -> Result<DenseMatrix> {
    check_dense(g, v)?;
    let m = markov_operator(g, v)?.materialize_dense()?;
    let vals = v.entries();
    let mut out = m;
    for (i, &vi) in vals.iter().enumerate() {
        out.row_mut(i).iter_mut().for_each(|x| *x *= vi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::diagonal_for;

    fn k(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    fn p3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn constant(n: usize, c: f64) -> DiagonalCentrality {
        DiagonalCentrality::from_entries(vec![c; n]).unwrap()
    }

    #[test]
    fn eigs_of_identity_exponents_are_adjacency_eigs() {
        let g = p3();
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let eig = cgso_eigs(&g, &d, 0.0, 0.0).unwrap();
        let s2 = 2f64.sqrt();
        assert!(close(&eig.values, &[s2, 0.0, -s2], 1e-14));
        let top = eig.vector(0);
        assert!(close(&top, &[0.5, s2 / 2.0, 0.5], 1e-14));
    }

    #[test]
    fn markov_spectrum_of_k3() {
        let g = k(3);
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let eig = cgso_eigs(&g, &d, -1.0, 0.0).unwrap();
        assert!(close(&eig.values, &[1.0, -0.5, -0.5], 1e-14));
        // eigenvectors of the non-symmetric operator
        let op = markov_operator(&g, &d).unwrap();
        for j in 0..3 {
            let u = eig.vector(j);
            let mu = op.apply(&u);
            assert!(close(&mu, &u.iter().map(|x| eig.values[j] * x).collect::<Vec<_>>(), 1e-13));
        }
    }

    #[test]
    fn moments_examples() {
        let g = k(3);
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let m = analytic_moments(&g, &d).unwrap();
        assert_eq!(m.mean, 0.0);
        assert!((m.std - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m.self_loop_mean - 0.5).abs() < 1e-15);

        let k2 = k(2);
        let d = diagonal_for(&k2, Centrality::Degree).unwrap();
        assert!((analytic_moments(&k2, &d).unwrap().std - 1.0).abs() < 1e-15);

        let g = p3();
        let m = analytic_moments(&g, &constant(3, 2.0)).unwrap();
        assert!((m.std - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gap_examples() {
        let cases = [(k(3), 1.5), (k(2), 2.0), (p3(), 1.0)];
        for (g, want) in cases {
            let d = diagonal_for(&g, Centrality::Degree).unwrap();
            let (gap, _) = spectral_gap(&g, &d, None).unwrap();
            assert!((gap - want).abs() < 1e-12, "{gap} vs {want}");
        }
        let none = Graph::empty(0);
        let v = DiagonalCentrality::from_entries(Vec::new()).unwrap();
        assert!(matches!(spectral_gap(&none, &v, None), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn bounds_examples() {
        let g = k(3);
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let b = eigenvalue_bounds(&g, &d).unwrap();
        assert_eq!((b.gamma, b.gershgorin), (1.0, 1.0));
        assert!((b.spectral_radius - 1.0).abs() < 1e-14);

        let b = eigenvalue_bounds(&g, &constant(3, 4.0)).unwrap();
        assert_eq!((b.gamma, b.gershgorin), (2.0, 0.5));
        assert!((b.spectral_radius - 0.5).abs() < 1e-14);
        assert!(b.gamma_applicable && b.gamma_holds && b.gershgorin_holds);

        // with V = I the gamma bound fails while the row-sum bound holds
        let b = eigenvalue_bounds(&g, &constant(3, 1.0)).unwrap();
        assert_eq!((b.gamma, b.gershgorin), (0.5, 2.0));
        assert!((b.spectral_radius - 2.0).abs() < 1e-14);
        assert!(!b.gamma_applicable && !b.gamma_holds && b.gershgorin_holds);

        let with_isolated = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            eigenvalue_bounds(&with_isolated, &constant(3, 1.0)),
            Err(Error::IsolatedNode { node: 2 })
        ));
    }

    #[test]
    fn cheeger_examples() {
        let g = k(2);
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let r = cheeger_bruteforce(&g, &d).unwrap();
        assert_eq!(r.edge.h, 1.0);
        assert_eq!(r.edge.argmin, vec![0]);
        assert!((r.lambda1 - 2.0).abs() < 1e-12);
        assert_eq!(r.edge.bound_rhs, 4.0);
        assert!(r.edge.holds && r.vertex.holds);

        let g = k(3);
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let r = cheeger_bruteforce(&g, &d).unwrap();
        assert_eq!(r.edge.h, 1.0);
        assert_eq!(r.vertex.h, 1.0);
        assert!((r.lambda1 - 1.5).abs() < 1e-12);
        assert_eq!(r.edge.bound_rhs, 12.0);

        // P3 with degrees: total mass 4, so U ranges over {0}, {2}, {1}, {0,2}
        let g = p3();
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let r = cheeger_bruteforce(&g, &d).unwrap();
        assert_eq!(r.edge.h, 1.0);
        assert_eq!(r.vertex.h, 0.5);
        assert_eq!(r.vertex.argmin, vec![0, 2]);
        assert!(r.edge.holds && r.vertex.holds);

        let two = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            cheeger_bruteforce(&two, &constant(4, 1.0)),
            Err(Error::Disconnected { components: 2 })
        ));
        let big = Graph::from_edges(17, (0..16).map(|i| (i, i + 1))).unwrap();
        assert!(matches!(
            cheeger_bruteforce(&big, &constant(17, 1.0)),
            Err(Error::TooManyNodes { .. })
        ));
    }

    #[test]
    fn report_is_consistent() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let v = diagonal_for(&g, Centrality::KCore).unwrap();
        let r = spectral_report(&g, &v, -1.0, 0.0).unwrap();
        assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!((r.analytic_std - r.eigen_std).abs() < 1e-12);
        assert!(r.eigen_mean.abs() < 1e-12);
        assert!(r.connected && r.gershgorin_bound_holds);
        let w = weighted_markov(&g, &v).unwrap();
        assert!(w.max_asymmetry() < 1e-15);
    }
}
