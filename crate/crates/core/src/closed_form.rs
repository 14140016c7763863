//! Tian–Pearl closed-form bounds for binary treatment and outcome.

use crate::error::EvidenceError;
use crate::model::{BoundsInterval, EvidenceSet, EPS_EVIDENCE};

/// Experimental marginals and the observational joint of a binary problem.
///
/// Field names read `p_<event>`: `yx` is `P(y_x)`, `yxp` is `P(y_{x'})`,
/// `xpyp` is `P(x', y')`, and so on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryEvidence {
    pub p_yx: f64,
    pub p_yxp: f64,
    pub p_xy: f64,
    pub p_xyp: f64,
    pub p_xpy: f64,
    pub p_xpyp: f64,
    pub p_y: f64,
}

impl BinaryEvidence {
    pub fn new(p_yx: f64, p_yxp: f64, [p_xy, p_xyp, p_xpy, p_xpyp]: [f64; 4], p_y: f64) -> Result<Self, EvidenceError> {
        let ev = Self {
            p_yx,
            p_yxp,
            p_xy,
            p_xyp,
            p_xpy,
            p_xpyp,
            p_y,
        };
        ev.validate(EPS_EVIDENCE)?;
        Ok(ev)
    }

    /// Reads `P(Y_x)` and `P(X, Y)` from the smallest matching families.
    pub fn from_evidence(evidence: &EvidenceSet) -> Result<Self, EvidenceError> {
        let exp = evidence
            .experimental_marginal()
            .ok_or_else(|| EvidenceError::Inconsistent("no experimental family".into()))?;
        let obs = evidence
            .observational_xy()
            .ok_or_else(|| EvidenceError::Inconsistent("no observational family".into()))?;
        if exp.len() != 4 || obs.len() != 4 {
            return Err(EvidenceError::Inconsistent(
                "closed-form bounds need binary treatment and outcome".into(),
            ));
        }
        Self::new(exp[0], exp[2], [obs[0], obs[1], obs[2], obs[3]], obs[0] + obs[2])
    }

    pub fn validate(&self, eps: f64) -> Result<(), EvidenceError> {
        let all = [
            self.p_yx,
            self.p_yxp,
            self.p_xy,
            self.p_xyp,
            self.p_xpy,
            self.p_xpyp,
            self.p_y,
        ];
        if let Some(&bad) = all.iter().find(|p| !(-eps..=1.0 + eps).contains(*p)) {
            return Err(EvidenceError::OutOfRange {
                family: "binary evidence".into(),
                value: bad,
            });
        }
        let joint = self.p_xy + self.p_xyp + self.p_xpy + self.p_xpyp;
        if (joint - 1.0).abs() > eps {
            return Err(EvidenceError::Normalization {
                family: "P(X,Y)".into(),
                residual: (joint - 1.0).abs(),
            });
        }
        if (self.p_y - self.p_xy - self.p_xpy).abs() > eps {
            return Err(EvidenceError::Inconsistent(format!(
                "P(y) = {} differs from P(x,y) + P(x',y) = {}",
                self.p_y,
                self.p_xy + self.p_xpy
            )));
        }
        Ok(())
    }

    /// Exchanges `x` with `x'` and `y` with `y'`.
    pub fn swapped(&self) -> Self {
        Self {
            p_yx: 1.0 - self.p_yxp,
            p_yxp: 1.0 - self.p_yx,
            p_xy: self.p_xpyp,
            p_xyp: self.p_xpy,
            p_xpy: self.p_xyp,
            p_xpyp: self.p_xy,
            p_y: 1.0 - self.p_y,
        }
    }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

pub fn tp_pns_bounds(ev: &BinaryEvidence) -> Result<BoundsInterval, EvidenceError> {
    ev.validate(EPS_EVIDENCE)?;
    let lb = [0.0, ev.p_yx - ev.p_yxp, ev.p_y - ev.p_yxp, ev.p_yx - ev.p_y]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let ub = [
        ev.p_yx,
        1.0 - ev.p_yxp,
        ev.p_xy + ev.p_xpyp,
        ev.p_yx - ev.p_yxp + ev.p_xyp + ev.p_xpy,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    Ok(BoundsInterval::new(clamp01(lb), clamp01(ub), true))
}

pub fn tp_pn_bounds(ev: &BinaryEvidence) -> Result<BoundsInterval, EvidenceError> {
    ev.validate(EPS_EVIDENCE)?;
    if ev.p_xy <= 0.0 {
        return Err(EvidenceError::Inconsistent("PN is undefined: P(x, y) = 0".into()));
    }
    let lb = f64::max(0.0, (ev.p_y - ev.p_yxp) / ev.p_xy);
    let ub = f64::min(1.0, ((1.0 - ev.p_yxp) - ev.p_xpyp) / ev.p_xy);
    Ok(BoundsInterval::new(clamp01(lb), clamp01(ub), true))
}

pub fn tp_ps_bounds(ev: &BinaryEvidence) -> Result<BoundsInterval, EvidenceError> {
    if ev.p_xpyp <= 0.0 {
        return Err(EvidenceError::Inconsistent("PS is undefined: P(x', y') = 0".into()));
    }
    tp_pn_bounds(&ev.swapped())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn third() -> BinaryEvidence {
        BinaryEvidence::new(0.7, 0.2, [0.35, 0.15, 0.10, 0.40], 0.45).unwrap()
    }

    fn uniform() -> BinaryEvidence {
        BinaryEvidence::new(0.5, 0.5, [0.25; 4], 0.5).unwrap()
    }

    fn close(b: BoundsInterval, lb: f64, ub: f64) {
        assert!(
            (b.lb - lb).abs() < 1e-12 && (b.ub - ub).abs() < 1e-12,
            "{b:?} vs [{lb}, {ub}]"
        );
    }

    #[test]
    fn pns_examples() {
        let det = BinaryEvidence::new(1.0, 0.0, [0.5, 0.0, 0.0, 0.5], 0.5).unwrap();
        close(tp_pns_bounds(&det).unwrap(), 1.0, 1.0);
        close(tp_pns_bounds(&uniform()).unwrap(), 0.0, 0.5);
        close(tp_pns_bounds(&third()).unwrap(), 0.5, 0.7);
    }

    #[test]
    fn pn_examples() {
        close(tp_pn_bounds(&third()).unwrap(), 0.25 / 0.35, 1.0);
        // no outcome without treatment
        let ev = BinaryEvidence::new(0.6, 0.0, [0.3, 0.0, 0.0, 0.7], 0.3).unwrap();
        close(tp_pn_bounds(&ev).unwrap(), 1.0, 1.0);
        close(tp_pn_bounds(&uniform()).unwrap(), 0.0, 1.0);
    }

    #[test]
    fn ps_examples() {
        close(tp_ps_bounds(&uniform()).unwrap(), 0.0, 1.0);
        close(tp_ps_bounds(&third()).unwrap(), 0.625, 0.875);
    }

    #[test]
    fn undefined_conditionals() {
        let ev = BinaryEvidence::new(0.5, 0.5, [0.0, 0.5, 0.5, 0.0], 0.5).unwrap();
        assert!(tp_pn_bounds(&ev).is_err());
        assert!(tp_ps_bounds(&ev).is_err());
    }

    #[test]
    fn inconsistent_evidence_is_rejected() {
        assert!(BinaryEvidence::new(0.5, 0.5, [0.25; 4], 0.6).is_err());
        assert!(BinaryEvidence::new(0.5, 0.5, [0.3, 0.25, 0.25, 0.25], 0.55).is_err());
    }

    fn arb_evidence() -> impl Strategy<Value = BinaryEvidence> {
        (prop::array::uniform4(0.01f64..1.0), 0.0f64..1.0, 0.0f64..1.0).prop_map(|(raw, a, b)| {
            let s: f64 = raw.iter().sum();
            let j = raw.map(|v| v / s);
            // consistency: P(y_x) >= P(x,y) and P(y'_x) >= P(x,y')
            let p_yx = j[0] + a * (1.0 - j[0] - j[1]);
            let p_yxp = j[2] + b * (1.0 - j[2] - j[3]);
            BinaryEvidence::new(p_yx, p_yxp, j, j[0] + j[2]).unwrap()
        })
    }

    proptest! {
        #[test]
        fn pns_interval_is_ordered(ev in arb_evidence()) {
            let b = tp_pns_bounds(&ev).unwrap();
            prop_assert!(b.lb <= b.ub + 1e-12);
        }

        #[test]
        fn ps_is_relabeled_pn(ev in arb_evidence()) {
            prop_assert_eq!(tp_ps_bounds(&ev).unwrap(), tp_pn_bounds(&ev.swapped()).unwrap());
        }
    }
}
