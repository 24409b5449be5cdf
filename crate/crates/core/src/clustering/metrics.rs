use crate::error::{Error, Result};
use crate::partition::Partition;

/// Contingency table `n[i][j] = |a_i ∩ b_j|`.
pub fn contingency(a: &Partition, b: &Partition) -> Result<Vec<Vec<u64>>> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "partitions of {} and {} elements",
            a.len(),
            b.len()
        )));
    }
    let mut table = vec![vec![0u64; b.k()]; a.k()];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        table[x][y] += 1;
    }
    Ok(table)
}

fn marginals(table: &[Vec<u64>]) -> (Vec<u64>, Vec<u64>, u64) {
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols = table.first().map_or(0, Vec::len);
    let col_sums: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let n = rows.iter().sum();
    (rows, col_sums, n)
}

fn entropy(counts: &[u64], n: u64) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mi_from_table(table: &[Vec<u64>], rows: &[u64], cols: &[u64], n: u64) -> f64 {
    let nf = n as f64;
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / nf * (nf * nij / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Mutual information in nats.
pub fn mutual_information(a: &Partition, b: &Partition) -> Result<f64> {
    let table = contingency(a, b)?;
    let (rows, cols, n) = marginals(&table);
    Ok(mi_from_table(&table, &rows, &cols, n))
}

/// Expected mutual information under the hypergeometric (fixed marginals)
/// model.
fn expected_mi(rows: &[u64], cols: &[u64], n: u64) -> f64 {
    let nu = n as usize;
    let mut log_fact = vec![0.0f64; nu + 1];
    for i in 1..=nu {
        log_fact[i] = log_fact[i - 1] + (i as f64).ln();
    }
    let nf = n as f64;
    let mut emi = 0.0;
    for &ai in rows {
        for &bj in cols {
            let (ai, bj) = (ai as usize, bj as usize);
            let lo = (ai + bj).saturating_sub(nu).max(1);
            let hi = ai.min(bj);
            let fixed = log_fact[ai] + log_fact[bj] + log_fact[nu - ai] + log_fact[nu - bj] - log_fact[nu];
            for nij in lo..=hi {
                let x = nij as f64;
                let log_p = fixed
                    - log_fact[nij]
                    - log_fact[ai - nij]
                    - log_fact[bj - nij]
                    - log_fact[nu + nij - ai - bj];
                emi += x / nf * (nf * x / (ai as f64 * bj as f64)).ln() * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information with `max(H(a), H(b))` normalization.
///
/// Partitions that agree up to relabelling score exactly 1; this covers the
/// single-cluster and all-singleton cases where the adjusted denominator
/// vanishes.
pub fn ami(a: &Partition, b: &Partition) -> Result<f64> {
    let table = contingency(a, b)?;
    let (rows, cols, n) = marginals(&table);
    let same = a.k() == b.k() && table.iter().all(|r| r.iter().filter(|&&x| x > 0).count() <= 1);
    if same || n == 0 {
        return Ok(1.0);
    }
    let mi = mi_from_table(&table, &rows, &cols, n);
    let emi = expected_mi(&rows, &cols, n);
    let norm = entropy(&rows, n).max(entropy(&cols, n));
    let mut denom = norm - emi;
    if denom < 0.0 {
        denom = denom.min(-f64::EPSILON);
    } else {
        denom = denom.max(f64::EPSILON);
    }
    Ok((mi - emi) / denom)
}

fn choose2(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Adjusted Rand index. When the chance-corrected denominator vanishes (both
/// partitions trivial in the same way) the score is 1 for identical
/// partitions and 0 otherwise.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    let table = contingency(a, b)?;
    let (rows, cols, n) = marginals(&table);
    let index: i128 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let sa: i128 = rows.iter().map(|&x| choose2(x)).sum();
    let sb: i128 = cols.iter().map(|&x| choose2(x)).sum();
    let total = choose2(n);
    // (index - sa sb / total) / ((sa + sb) / 2 - sa sb / total), scaled by 2 total
    let num = 2 * (index * total - sa * sb);
    let den = (sa + sb) * total - 2 * sa * sb;
    if den == 0 {
        let identical = a.k() == b.k() && table.iter().all(|r| r.iter().filter(|&&x| x > 0).count() <= 1);
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}
