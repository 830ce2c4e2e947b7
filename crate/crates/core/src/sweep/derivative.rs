use super::record::ResultRecord;
use crate::error::{domain, Result};

/// Relative spacing mismatch accepted as "uniform".
const UNIFORM_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_uniform(h: &[f64]) -> Result<f64> {
    if h.len() < 2 {
        return Err(domain("a derivative needs at least two h values"));
    }
    let step = h[1] - h[0];
    if !(step > 0.0) {
        return Err(domain("h grid must be strictly increasing"));
    }
    for w in h.windows(2) {
        if ((w[1] - w[0]) - step).abs() > UNIFORM_TOLERANCE * step {
            return Err(domain(format!(
                "h grid is not uniformly spaced: step {} between {} and {} (expected {step})",
                w[1] - w[0],
                w[0],
                w[1]
            )));
        }
    }
    Ok(step)
}

/// Central differences inside, second-order one-sided at the ends.
/// Returns `None` wherever a stencil value is missing (error rows).
pub fn finite_differences(h: &[f64], p: &[Option<f64>]) -> Result<Vec<Option<f64>>> {
    assert_eq!(h.len(), p.len());
    check_uniform(h)?;
    let n = h.len();
    let mut out = vec![None; n];
    for i in 0..n {
        out[i] = if n == 2 {
            match (p[0], p[1]) {
                (Some(a), Some(b)) => Some((b - a) / (h[1] - h[0])),
                _ => None,
            }
        } else if i == 0 {
            match (p[0], p[1], p[2]) {
                (Some(a), Some(b), Some(c)) => Some((4.0 * (b - a) - (c - a)) / (h[2] - h[0])),
                _ => None,
            }
        } else if i == n - 1 {
            match (p[n - 3], p[n - 2], p[n - 1]) {
                (Some(a), Some(b), Some(c)) => Some((3.0 * (c - b) - (b - a)) / (h[n - 1] - h[n - 3])),
                _ => None,
            }
        } else {
            match (p[i - 1], p[i + 1]) {
                (Some(a), Some(b)) => Some((b - a) / (h[i + 1] - h[i - 1])),
                _ => None,
            }
        };
    }
    Ok(out)
}

/// Fills `dptr_dh` on every record.
///
/// Records are grouped into runs of consecutive rows sharing every parameter
/// except `h`; each run must be a uniformly spaced, increasing h grid.
pub fn derivative_postprocess(records: &[ResultRecord]) -> Result<Vec<ResultRecord>> {
    let mut out = records.to_vec();
    let mut start = 0;
    while start < out.len() {
        let mut end = start + 1;
        while end < out.len() && out[end].same_curve(&out[start]) {
            end += 1;
        }
        let run = &mut out[start..end];
        let h: Vec<f64> = run.iter().map(|r| r.h).collect();
        let p: Vec<Option<f64>> = run.iter().map(|r| r.p_tr).collect();
        let d = finite_differences(&h, &p)?;
        for (r, v) in run.iter_mut().zip(d) {
            r.dptr_dh = v;
        }
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| 0.1 * i as f64).collect()
    }

    #[test]
    fn constant_gives_zero() {
        let h = grid(7);
        let d = finite_differences(&h, &vec![Some(0.3); 7]).unwrap();
        assert!(d.iter().all(|x| x.unwrap() == 0.0));
    }

    #[test]
    fn linear_gives_slope() {
        let h = grid(9);
        let p: Vec<_> = h.iter().map(|x| Some(0.25 - 1.7 * x)).collect();
        for v in finite_differences(&h, &p).unwrap() {
            assert!((v.unwrap() + 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_is_exact_everywhere() {
        let h = grid(6);
        let p: Vec<_> = h.iter().map(|x| Some(x * x)).collect();
        for (x, v) in h.iter().zip(finite_differences(&h, &p).unwrap()) {
            assert!((v.unwrap() - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_values_propagate() {
        let h = grid(5);
        let p = vec![Some(0.0), Some(1.0), None, Some(3.0), Some(4.0)];
        let d = finite_differences(&h, &p).unwrap();
        assert_eq!(d[1], None);
        assert_eq!(d[3], None);
        assert!(d[2].is_some());
    }

    #[test]
    fn non_uniform_rejected() {
        assert!(finite_differences(&[0.0, 0.1, 0.3], &[Some(0.0); 3]).is_err());
        assert!(finite_differences(&[0.0], &[Some(0.0)]).is_err());
    }
}
