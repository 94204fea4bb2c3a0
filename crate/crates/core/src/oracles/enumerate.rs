use itertools::Itertools;

use crate::error::{Error, Result};

const MAX_SUBSET_N: usize = 12;
const MAX_GRID: usize = 10_000;

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Exact `E_𝔅 ‖(1/B) Σ_{b∈𝔅} v_b‖²` over all `C(n, B)` subsets of a zero-sum family.
pub fn subset_mean_sq_bruteforce(vectors: &[Vec<f64>], batch: usize) -> Result<f64> {
    let n = vectors.len();
    if n == 0 || n > MAX_SUBSET_N {
        return Err(Error::Precondition(format!("need 1 ≤ n ≤ {MAX_SUBSET_N}, got {n}")));
    }
    if batch == 0 || batch > n {
        return Err(Error::Precondition(format!(
            "subset size must lie in [1, {n}], got {batch}"
        )));
    }
    let d = vectors[0].len();
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::Precondition("vectors must share one length".into()));
    }
    for l in 0..d {
        let s: f64 = vectors.iter().map(|v| v[l]).sum();
        if s.abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "family is not zero-sum (coordinate {l} sums to {s})"
            )));
        }
    }
    let mut total = 0.0;
    let mut count = 0u64;
    let mut mean = vec![0.0; d];
    for subset in (0..n).combinations(batch) {
        mean.iter_mut().for_each(|m| *m = 0.0);
        for &b in &subset {
            for (m, v) in mean.iter_mut().zip(&vectors[b]) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= batch as f64);
        total += norm_sq(&mean);
        count += 1;
    }
    Ok(total / count as f64)
}

/// `((n − B) / (B (n − 1))) · (1/n) Σ ‖v_i‖²`, the closed form of [`subset_mean_sq_bruteforce`].
pub fn subset_mean_sq_formula(vectors: &[Vec<f64>], batch: usize) -> f64 {
    let n = vectors.len() as f64;
    let b = batch as f64;
    let second = vectors.iter().map(|v| norm_sq(v)).sum::<f64>() / n;
    if vectors.len() == 1 {
        return 0.0;
    }
    (n - b) / (b * (n - 1.0)) * second
}

/// Exact average of `h(i, j)` over the `n × D` grid.
pub fn pair_average_bruteforce<F>(h: F, components: usize, directions: usize) -> Result<Vec<f64>>
where
    F: Fn(usize, usize) -> Vec<f64>,
{
    if components == 0 || directions == 0 {
        return Err(Error::Precondition("grid must be non-empty".into()));
    }
    if components * directions > MAX_GRID {
        return Err(Error::Precondition(format!(
            "grid of {} cells exceeds {MAX_GRID}",
            components * directions
        )));
    }
    let mut acc: Option<Vec<f64>> = None;
    for i in 0..components {
        for j in 0..directions {
            let v = h(i, j);
            match &mut acc {
                None => acc = Some(v),
                Some(a) => {
                    if a.len() != v.len() {
                        return Err(Error::Precondition("h returned vectors of different lengths".into()));
                    }
                    a.iter_mut().zip(&v).for_each(|(x, y)| *x += y);
                }
            }
        }
    }
    let cells = (components * directions) as f64;
    let mut acc = acc.unwrap_or_default();
    acc.iter_mut().for_each(|x| *x /= cells);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_scalars() {
        let v = vec![vec![1.0], vec![0.0], vec![-1.0]];
        let e = subset_mean_sq_bruteforce(&v, 2).unwrap();
        assert!((e - 1.0 / 6.0).abs() < 1e-15);
        assert!((subset_mean_sq_formula(&v, 2) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(subset_mean_sq_bruteforce(&v, 3).unwrap(), 0.0);
        assert!((subset_mean_sq_bruteforce(&v, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_zero_sum() {
        let v = vec![vec![1.0], vec![0.5]];
        assert!(matches!(subset_mean_sq_bruteforce(&v, 1), Err(Error::Precondition(_))));
        let big = vec![vec![0.0]; 13];
        assert!(subset_mean_sq_bruteforce(&big, 2).is_err());
    }

    #[test]
    fn grid_average_by_hand() {
        let table = [
            [[1.0, 2.0], [3.0, -1.0]],
            [[0.5, 0.5], [-2.0, 4.0]],
            [[7.0, 0.0], [1.0, 1.0]],
        ];
        let avg = pair_average_bruteforce(|i, j| table[i][j].to_vec(), 3, 2).unwrap();
        let mut expected = [0.0; 2];
        for row in &table {
            for cell in row {
                expected[0] += cell[0];
                expected[1] += cell[1];
            }
        }
        assert!((avg[0] - expected[0] / 6.0).abs() < 1e-12);
        assert!((avg[1] - expected[1] / 6.0).abs() < 1e-12);
        assert!(pair_average_bruteforce(|_, _| vec![0.0], 101, 100).is_err());
    }

    #[test]
    fn constant_centered_grid() {
        let c = [0.25, -0.5];
        let avg =
            pair_average_bruteforce(|i, _| if i % 2 == 0 { c.to_vec() } else { vec![-c[0], -c[1]] }, 4, 3).unwrap();
        assert_eq!(avg, vec![0.0, 0.0]);
    }
}
