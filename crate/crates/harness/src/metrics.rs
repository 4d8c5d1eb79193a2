use crate::error::{HarnessError, Result};

pub fn mean(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(HarnessError::Empty("mean of an empty list".into()));
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Sample standard deviation; 0 for a single value.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn std_err(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    std_dev(v) / (v.len() as f64).sqrt()
}

/// `mean(eval) - mean(pretest)`.
pub fn reward_improvement(pretest: &[f64], eval: &[f64]) -> Result<f64> {
    Ok(mean(eval)? - mean(pretest)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_arithmetic() {
        assert_eq!(reward_improvement(&[-10.0, -8.0], &[-5.0; 5]).unwrap(), 4.0);
        assert_eq!(reward_improvement(&[-3.0, -1.0], &[-2.0, -2.0]).unwrap(), 0.0);
        assert!(reward_improvement(&[], &[-1.0]).is_err());
    }
}
