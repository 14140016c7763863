use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::trials::TrialRecord;
use crate::LabError;

/// Differences below this do not count as an improvement.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

/// With proposed `[a, b]`, closed-form `[c, d]` and single-covariate
/// `[e, f]` per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    /// mean of `a - c`
    pub avg_tp_lb_gain: f64,
    /// mean of `d - b`
    pub avg_tp_ub_drop: f64,
    /// mean of `a - e`
    pub avg_mlp_lb_gain: f64,
    /// mean of `f - b`
    pub avg_mlp_ub_drop: f64,
    pub avg_gap_tp: f64,
    pub avg_gap_mlp: f64,
    pub avg_gap_proposed: f64,
    /// trials with `a > c` or `b < d`
    pub count_improved_tp: usize,
    /// trials with `a > e` or `b < f`
    pub count_improved_mlp: usize,
}

impl SummaryStats {
    /// `(name, value)` in reporting order.
    pub fn rows(&self) -> [(&'static str, f64); 9] {
        [
            ("avg_tp_lb_gain", self.avg_tp_lb_gain),
            ("avg_tp_ub_drop", self.avg_tp_ub_drop),
            ("avg_mlp_lb_gain", self.avg_mlp_lb_gain),
            ("avg_mlp_ub_drop", self.avg_mlp_ub_drop),
            ("avg_gap_tp", self.avg_gap_tp),
            ("avg_gap_mlp", self.avg_gap_mlp),
            ("avg_gap_proposed", self.avg_gap_proposed),
            ("count_improved_tp", self.count_improved_tp as f64),
            ("count_improved_mlp", self.count_improved_mlp as f64),
        ]
    }
}

pub fn summarize(records: &[TrialRecord]) -> Result<SummaryStats, LabError> {
    if records.is_empty() {
        return Err(LabError::InvalidArgument("no records to summarize".into()));
    }
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let improved = |lo: f64, hi: f64, a: f64, b: f64| a > lo + IMPROVEMENT_TOL || b < hi - IMPROVEMENT_TOL;
    Ok(SummaryStats {
        avg_tp_lb_gain: mean(&|r| r.proposed.lb - r.tp.lb),
        avg_tp_ub_drop: mean(&|r| r.tp.ub - r.proposed.ub),
        avg_mlp_lb_gain: mean(&|r| r.proposed.lb - r.mlp.lb),
        avg_mlp_ub_drop: mean(&|r| r.mlp.ub - r.proposed.ub),
        avg_gap_tp: mean(&|r| r.tp.width()),
        avg_gap_mlp: mean(&|r| r.mlp.width()),
        avg_gap_proposed: mean(&|r| r.proposed.width()),
        count_improved_tp: records
            .iter()
            .filter(|r| improved(r.tp.lb, r.tp.ub, r.proposed.lb, r.proposed.ub))
            .count(),
        count_improved_mlp: records
            .iter()
            .filter(|r| improved(r.mlp.lb, r.mlp.ub, r.proposed.lb, r.proposed.ub))
            .count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotRow {
    pub rank: usize,
    pub trial: usize,
    pub tp: f64,
    pub mlp: f64,
    pub proposed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    /// Lower bounds, sorted by the closed-form lower bound.
    pub lower: Vec<PlotRow>,
    /// Upper bounds, sorted by the closed-form upper bound.
    pub upper: Vec<PlotRow>,
}

/// Draws `sample` records uniformly without replacement and sorts them by
/// closed-form lower (resp. upper) bound. Ties keep trial order.
pub fn sorted_plot_series(records: &[TrialRecord], sample: usize, seed: u64) -> Result<PlotSeries, LabError> {
    if sample > records.len() {
        return Err(LabError::InvalidArgument(format!(
            "sample of {sample} exceeds {} records",
            records.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, records.len(), sample).into_vec();
    picked.sort_unstable();
    let chosen: Vec<&TrialRecord> = picked.iter().map(|&i| &records[i]).collect();
    let series = |key: fn(&TrialRecord) -> (f64, f64, f64)| {
        let mut rows: Vec<&TrialRecord> = chosen.clone();
        rows.sort_by(|a, b| key(a).0.total_cmp(&key(b).0));
        rows.into_iter()
            .enumerate()
            .map(|(rank, r)| {
                let (tp, mlp, proposed) = key(r);
                PlotRow {
                    rank,
                    trial: r.trial,
                    tp,
                    mlp,
                    proposed,
                }
            })
            .collect()
    };
    Ok(PlotSeries {
        lower: series(|r| (r.tp.lb, r.mlp.lb, r.proposed.lb)),
        upper: series(|r| (r.tp.ub, r.mlp.ub, r.proposed.ub)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use causebound::{BoundsInterval, SolveStatus};

    pub(crate) fn record(trial: usize, tp: (f64, f64), mlp: (f64, f64), proposed: (f64, f64)) -> TrialRecord {
        TrialRecord {
            trial,
            seed: 0,
            tp: BoundsInterval::new(tp.0, tp.1, true),
            mlp: BoundsInterval::new(mlp.0, mlp.1, true),
            proposed: BoundsInterval::new(proposed.0, proposed.1, true),
            inner: None,
            truth: 0.5 * (proposed.0 + proposed.1),
            status: SolveStatus::Optimal,
            nodes: 1,
            lp_solves: 1,
            runtime_ms: 0.0,
            max_residual: 0.0,
        }
    }

    #[test]
    fn two_point_arithmetic() {
        let recs = [
            record(0, (0.1, 0.5), (0.1, 0.5), (0.2, 0.4)),
            record(1, (0.0, 0.6), (0.0, 0.6), (0.0, 0.6)),
        ];
        let s = summarize(&recs).unwrap();
        assert!((s.avg_tp_lb_gain - 0.05).abs() < 1e-15);
        assert!((s.avg_tp_ub_drop - 0.05).abs() < 1e-15);
        assert!((s.avg_gap_tp - 0.5).abs() < 1e-15);
        assert!((s.avg_gap_proposed - 0.4).abs() < 1e-15);
        assert_eq!(s.count_improved_tp, 1);
    }

    #[test]
    fn identical_methods_show_no_gain() {
        let recs: Vec<_> = (0..5).map(|i| record(i, (0.1, 0.7), (0.1, 0.7), (0.1, 0.7))).collect();
        let s = summarize(&recs).unwrap();
        assert_eq!((s.avg_tp_lb_gain, s.avg_mlp_ub_drop), (0.0, 0.0));
        assert_eq!((s.count_improved_tp, s.count_improved_mlp), (0, 0));
    }

    #[test]
    fn sub_tolerance_changes_do_not_count() {
        let recs = [record(0, (0.1, 0.5), (0.1, 0.5), (0.1 + 1e-12, 0.5))];
        assert_eq!(summarize(&recs).unwrap().count_improved_tp, 0);
    }

    #[test]
    fn plot_series_sorts_and_samples() {
        let recs: Vec<_> = (0..20)
            .map(|i| {
                let lb = ((i * 7) % 20) as f64 / 40.0;
                record(i, (lb, lb + 0.3), (lb + 0.01, lb + 0.29), (lb + 0.02, lb + 0.28))
            })
            .collect();
        let all = sorted_plot_series(&recs, 20, 1).unwrap();
        assert!(all.lower.windows(2).all(|w| w[0].tp <= w[1].tp));
        assert!(all.upper.windows(2).all(|w| w[0].tp <= w[1].tp));
        assert!(all.lower.iter().all(|r| r.proposed >= r.tp));
        let some = sorted_plot_series(&recs, 5, 1).unwrap();
        assert_eq!(some.lower.len(), 5);
        assert_eq!(some, sorted_plot_series(&recs, 5, 1).unwrap());
        assert!(sorted_plot_series(&recs, 21, 1).is_err());
    }
}
