//! Benjamini-Hochberg false discovery rate selection.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdrSelection {
    /// Largest rank `i` (1-based) with `p_(i) <= i t / N`; zero when none.
    pub cutoff: usize,
    /// The p-value at the cutoff rank, if any hypothesis was rejected.
    pub threshold: Option<f64>,
    /// Indices (into the input) of rejected hypotheses, ascending.
    pub rejected: Vec<usize>,
    pub n_hypotheses: usize,
}

fn check_level(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "FDR level must lie in (0, 1), got {t}"
        )));
    }
    Ok(())
}

/// Rejects hypotheses ranked `1..=î` after sorting p-values ascending.
pub fn fdr_select(p_values: &[f64], t: f64) -> Result<FdrSelection> {
    if p_values.is_empty() {
        return Err(Error::InvalidConfig("no p-values to select from".into()));
    }
    fdr_select_among(p_values, p_values.len(), t)
}

/// As [`fdr_select`], but the listed p-values are only the candidates out of
/// `n_hypotheses` tests; the unlisted ones are taken to have p-value 1, which
/// can never pass the criterion since `i t / N < 1`.
pub fn fdr_select_among(p_values: &[f64], n_hypotheses: usize, t: f64) -> Result<FdrSelection> {
    check_level(t)?;
    if let Some(&p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidPValue(p));
    }
    if n_hypotheses < p_values.len() {
        return Err(Error::InvalidConfig(
            "fewer hypotheses than p-values".into(),
        ));
    }
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let n = n_hypotheses as f64;
    let cutoff = order
        .iter()
        .enumerate()
        .rev()
        .find(|&(i, &idx)| p_values[idx] <= (i + 1) as f64 * t / n)
        .map_or(0, |(i, _)| i + 1);
    let mut rejected: Vec<usize> = order[..cutoff].to_vec();
    rejected.sort_unstable();
    Ok(FdrSelection {
        cutoff,
        threshold: (cutoff > 0).then(|| p_values[order[cutoff - 1]]),
        rejected,
        n_hypotheses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_rejects_four() {
        let sel = fdr_select(&[0.001, 0.012, 0.02, 0.04, 0.9], 0.05).unwrap();
        assert_eq!(sel.cutoff, 4);
        assert_eq!(sel.rejected, vec![0, 1, 2, 3]);
        assert_eq!(sel.threshold, Some(0.04));
    }

    #[test]
    fn all_ones_reject_nothing() {
        let sel = fdr_select(&[1.0; 10], 0.05).unwrap();
        assert_eq!(sel.cutoff, 0);
        assert!(sel.rejected.is_empty());
        assert_eq!(sel.threshold, None);
    }

    #[test]
    fn single_small_p_value_is_rejected() {
        assert_eq!(fdr_select(&[0.004], 0.05).unwrap().rejected, vec![0]);
    }

    #[test]
    fn step_up_rescues_earlier_ranks() {
        // p_(1) fails its own bound (0.03 > 0.05/3) but p_(3) passes at 3t/N.
        let sel = fdr_select(&[0.05, 0.03, 0.04], 0.05).unwrap();
        assert_eq!(sel.cutoff, 3);
    }

    #[test]
    fn unsorted_input_reports_original_indices() {
        let sel = fdr_select(&[0.9, 0.001, 0.5, 0.002], 0.05).unwrap();
        assert_eq!(sel.rejected, vec![1, 3]);
    }

    #[test]
    fn implicit_hypotheses_raise_the_bar() {
        // Alone, 0.02 passes at t = 0.05; among 10 tests it needs <= 0.005.
        assert_eq!(fdr_select_among(&[0.02], 1, 0.05).unwrap().cutoff, 1);
        assert_eq!(fdr_select_among(&[0.02], 10, 0.05).unwrap().cutoff, 0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            fdr_select(&[0.5, 1.5], 0.05),
            Err(Error::InvalidPValue(_))
        ));
        assert!(matches!(
            fdr_select(&[-0.1], 0.05),
            Err(Error::InvalidPValue(_))
        ));
        assert!(fdr_select(&[], 0.05).is_err());
        assert!(fdr_select(&[0.1], 0.0).is_err());
        assert!(fdr_select(&[0.1], 1.0).is_err());
    }
}
