use alloc::vec::Vec;

use crate::{Error, Result};

/// Coefficient of determination `1 - SS_res / SS_tot`.
///
/// Unbounded below: a predictor worse than the mean gives a negative score.
pub fn r2_score(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::dimension("predictions", y.len(), y_hat.len()));
    }
    if y.len() < 2 {
        return Err(Error::Argument("R2 needs at least two samples".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Argument("R2 is undefined for constant targets".into()));
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mean_squared_error(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::dimension("predictions", y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(Error::Argument("MSE of an empty set".into()));
    }
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

/// Median of the finite values; `None` when there are none. Even counts
/// average the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r2_hand_cases() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r2_score(&y, &y).unwrap(), 1.0);
        assert!(r2_score(&y, &[2.0, 2.0, 2.0]).unwrap().abs() < 1e-12);
        assert!((r2_score(&y, &[1.0, 2.0, 4.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn r2_can_go_negative() {
        assert!(r2_score(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() < 0.0);
    }

    #[test]
    fn r2_errors() {
        assert!(r2_score(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(r2_score(&[1.0], &[1.0]).is_err());
        assert!(r2_score(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[f64::NAN, 5.0]), Some(5.0));
        assert_eq!(median(&[]), None);
    }
}
