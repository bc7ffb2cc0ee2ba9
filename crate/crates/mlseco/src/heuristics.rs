//! Confusion-matrix algebra and bipartition evaluation functions.
//!
//! A rule's quality is judged on a 2x2 confusion matrix aggregated
//! cell-wise over instances. "Positive" throughout means *equal to the
//! minority class* of the label under consideration, not literal 1.
//!
//! All evaluation functions map a matrix into [0, 1]. Degenerate 0/0 forms
//! evaluate to 0 so that vacuous rules never win a comparison.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Relative tolerance under which two heuristic values count as tied and
/// the tie-breaking order (true positives, then body size) applies.
pub const TIE_EPS: f64 = 1e-12;

/// True if `a` and `b` are equal up to [`TIE_EPS`] relative tolerance.
pub fn values_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_EPS * a.abs().max(b.abs())
}

/// The four counts of a bipartition confusion matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub const ZERO: ConfusionMatrix = ConfusionMatrix {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };

    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    /// Positives: instances whose ground truth equals the minority class.
    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Negatives: instances whose ground truth differs from the minority class.
    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Cell-wise addition (the aggregation operator over atomic matrices).
    pub fn add(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

/// Confusion matrix of a single (instance, label) pair. Exactly one cell is 1.
///
/// `truth` and `predicted` are raw label values in {0, 1}; `minority` is the
/// label's minority class. A prediction counts as positive iff it equals the
/// minority class.
pub fn atomic_confusion(truth: u8, predicted: u8, minority: u8) -> ConfusionMatrix {
    debug_assert!(truth <= 1 && predicted <= 1 && minority <= 1);
    let actual_pos = truth == minority;
    let predicted_pos = predicted == minority;
    match (actual_pos, predicted_pos) {
        (true, true) => ConfusionMatrix::new(1, 0, 0, 0),
        (false, true) => ConfusionMatrix::new(0, 1, 0, 0),
        (true, false) => ConfusionMatrix::new(0, 0, 1, 0),
        (false, false) => ConfusionMatrix::new(0, 0, 0, 1),
    }
}

/// A parameterized bipartition evaluation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeuristicSpec {
    Precision,
    Recall,
    FMeasure { beta: f64 },
    MEstimate { m: f64 },
    Wra,
}

impl HeuristicSpec {
    /// Evaluate the heuristic on a confusion matrix. Result is in [0, 1].
    pub fn evaluate(&self, c: &ConfusionMatrix) -> f64 {
        match *self {
            HeuristicSpec::Precision => precision(c),
            HeuristicSpec::Recall => recall(c),
            HeuristicSpec::FMeasure { beta } => {
                let prec = precision(c);
                let rec = recall(c);
                if prec == 0.0 || rec == 0.0 {
                    0.0
                } else {
                    let b2 = beta * beta;
                    (b2 + 1.0) / (b2 / rec + 1.0 / prec)
                }
            }
            HeuristicSpec::MEstimate { m } => {
                let tp = c.tp as f64;
                let covered = (c.tp + c.fp) as f64;
                let denom = covered + m;
                if denom == 0.0 {
                    return 0.0;
                }
                (tp + m * base_rate(c)) / denom
            }
            HeuristicSpec::Wra => {
                let total = c.total() as f64;
                if total == 0.0 {
                    return 0.5;
                }
                let covered = (c.tp + c.fp) as f64;
                let raw = if covered == 0.0 {
                    0.0
                } else {
                    covered / total * (c.tp as f64 / covered - base_rate(c))
                };
                // Raw WRA lies in [-0.25, 0.25]; rescale onto the shared
                // [0, 1] scale without changing the ordering.
                raw * 2.0 + 0.5
            }
        }
    }
}

fn precision(c: &ConfusionMatrix) -> f64 {
    let denom = c.tp + c.fp;
    if denom == 0 {
        0.0
    } else {
        c.tp as f64 / denom as f64
    }
}

fn recall(c: &ConfusionMatrix) -> f64 {
    let denom = c.tp + c.fn_;
    if denom == 0 {
        0.0
    } else {
        c.tp as f64 / denom as f64
    }
}

/// P / (P + N), the fraction of positives among all instances; 0 when empty.
fn base_rate(c: &ConfusionMatrix) -> f64 {
    let total = c.total();
    if total == 0 {
        0.0
    } else {
        c.positives() as f64 / total as f64
    }
}

const GRAMMAR_HINT: &str = "expected one of: precision | recall | f:<beta> | m:<m> | wra";

impl FromStr for HeuristicSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |msg: String| Error::Config(format!("{msg} ({GRAMMAR_HINT})"));
        match s {
            "precision" => Ok(HeuristicSpec::Precision),
            "recall" => Ok(HeuristicSpec::Recall),
            "wra" => Ok(HeuristicSpec::Wra),
            other => {
                if let Some(raw) = other.strip_prefix("f:") {
                    let beta: f64 = raw
                        .parse()
                        .map_err(|_| bad(format!("invalid beta {raw:?}")))?;
                    if !beta.is_finite() || beta < 0.0 {
                        return Err(bad(format!("beta must be a finite value >= 0, got {raw}")));
                    }
                    Ok(HeuristicSpec::FMeasure { beta })
                } else if let Some(raw) = other.strip_prefix("m:") {
                    let m: f64 = raw.parse().map_err(|_| bad(format!("invalid m {raw:?}")))?;
                    if !m.is_finite() || m < 0.0 {
                        return Err(bad(format!("m must be a finite value >= 0, got {raw}")));
                    }
                    Ok(HeuristicSpec::MEstimate { m })
                } else {
                    Err(bad(format!("unknown heuristic {other:?}")))
                }
            }
        }
    }
}

impl fmt::Display for HeuristicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicSpec::Precision => write!(f, "precision"),
            HeuristicSpec::Recall => write!(f, "recall"),
            HeuristicSpec::FMeasure { beta } => write!(f, "f:{beta}"),
            HeuristicSpec::MEstimate { m } => write!(f, "m:{m}"),
            HeuristicSpec::Wra => write!(f, "wra"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(rng: &mut impl Rng) -> ConfusionMatrix {
        ConfusionMatrix::new(
            rng.gen_range(0..50),
            rng.gen_range(0..50),
            rng.gen_range(0..50),
            rng.gen_range(0..50),
        )
    }

    #[test]
    fn atomic_has_exactly_one_cell_set() {
        for truth in [0u8, 1] {
            for pred in [0u8, 1] {
                for t in [0u8, 1] {
                    let c = atomic_confusion(truth, pred, t);
                    assert_eq!(c.total(), 1);
                }
            }
        }
    }

    #[test]
    fn atomic_positive_means_minority() {
        // y = t and y^ = t is a true positive regardless of the raw bits.
        assert_eq!(atomic_confusion(1, 1, 1).tp, 1);
        assert_eq!(atomic_confusion(0, 0, 0).tp, 1);
        // y != t with a positive prediction is a false positive.
        assert_eq!(atomic_confusion(0, 1, 1).fp, 1);
        assert_eq!(atomic_confusion(1, 0, 0).fp, 1);
        // y = t left uncovered is a false negative.
        assert_eq!(atomic_confusion(1, 0, 1).fn_, 1);
        // y != t with a negative prediction is a true negative.
        assert_eq!(atomic_confusion(0, 0, 1).tn, 1);
    }

    #[test]
    fn add_is_cellwise_with_zero_identity() {
        let a = ConfusionMatrix::new(1, 0, 0, 0);
        let b = ConfusionMatrix::new(0, 1, 0, 0);
        assert_eq!(a.add(&b), ConfusionMatrix::new(1, 1, 0, 0));
        assert_eq!(a.add(&ConfusionMatrix::ZERO), a);

        // A fold of m atomic matrices has cell-sum m.
        let mut acc = ConfusionMatrix::ZERO;
        for i in 0..10u8 {
            acc = acc.add(&atomic_confusion(i % 2, (i / 2) % 2, 1));
        }
        assert_eq!(acc.total(), 10);
    }

    #[test]
    fn precision_example() {
        let c = ConfusionMatrix::new(3, 1, 4, 2);
        assert_eq!(HeuristicSpec::Precision.evaluate(&c), 0.75);
    }

    #[test]
    fn m_estimate_zero_equals_precision_exactly() {
        let mut rng = crate::rng::Stream::new(9).rng();
        for _ in 0..2000 {
            let c = random_matrix(&mut rng);
            let m0 = HeuristicSpec::MEstimate { m: 0.0 }.evaluate(&c);
            let p = HeuristicSpec::Precision.evaluate(&c);
            assert_eq!(m0, p, "mismatch on {c:?}");
        }
    }

    #[test]
    fn m_estimate_worked_example() {
        // TP=3, FP=1, P=8, N=12, m=2 -> (3 + 2*8/20) / 6 = 3.8/6
        let c = ConfusionMatrix::new(3, 1, 5, 11);
        assert_eq!(c.positives(), 8);
        assert_eq!(c.negatives(), 12);
        let h = HeuristicSpec::MEstimate { m: 2.0 }.evaluate(&c);
        assert!((h - 3.8 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn f_measure_beta_one_harmonic_mean() {
        // prec = 0.5, rec = 1.0 -> F1 = 2/3
        let c = ConfusionMatrix::new(2, 2, 0, 3);
        let f1 = HeuristicSpec::FMeasure { beta: 1.0 }.evaluate(&c);
        assert!((f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f_measure_limits_order_like_precision_and_recall() {
        // Pairwise comparisons at extreme beta must agree with the pure
        // measures whenever those are not tied.
        let mut rng = crate::rng::Stream::new(30).rng();
        let pool: Vec<ConfusionMatrix> = (0..60).map(|_| random_matrix(&mut rng)).collect();
        let tiny = HeuristicSpec::FMeasure { beta: 1e-6 };
        let huge = HeuristicSpec::FMeasure { beta: 1e6 };
        for a in &pool {
            for b in &pool {
                let pa = HeuristicSpec::Precision.evaluate(a);
                let pb = HeuristicSpec::Precision.evaluate(b);
                // The beta->0 limit breaks down when either value degenerates
                // to 0 (F is 0 whenever recall is 0, precision is not).
                if pa > pb + 1e-9
                    && HeuristicSpec::Recall.evaluate(a) > 0.0
                    && HeuristicSpec::Recall.evaluate(b) > 0.0
                {
                    assert!(
                        tiny.evaluate(a) > tiny.evaluate(b),
                        "beta->0 ordering broke on {a:?} vs {b:?}"
                    );
                }
                let ra = HeuristicSpec::Recall.evaluate(a);
                let rb = HeuristicSpec::Recall.evaluate(b);
                if ra > rb + 1e-9 && pa > 0.0 && pb > 0.0 {
                    assert!(
                        huge.evaluate(a) > huge.evaluate(b),
                        "beta->inf ordering broke on {a:?} vs {b:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn values_stay_in_unit_interval() {
        let specs = [
            HeuristicSpec::Precision,
            HeuristicSpec::Recall,
            HeuristicSpec::FMeasure { beta: 0.25 },
            HeuristicSpec::FMeasure { beta: 4.0 },
            HeuristicSpec::MEstimate { m: 16.0 },
            HeuristicSpec::Wra,
        ];
        let mut rng = crate::rng::Stream::new(11).rng();
        for _ in 0..2000 {
            let c = random_matrix(&mut rng);
            for spec in &specs {
                let h = spec.evaluate(&c);
                assert!((0.0..=1.0).contains(&h), "{spec} gave {h} on {c:?}");
            }
        }
    }

    #[test]
    fn precision_monotone_in_tp_and_fp() {
        let mut rng = crate::rng::Stream::new(12).rng();
        for _ in 0..500 {
            let c = random_matrix(&mut rng);
            let more_tp = ConfusionMatrix::new(c.tp + 1, c.fp, c.fn_, c.tn);
            let more_fp = ConfusionMatrix::new(c.tp, c.fp + 1, c.fn_, c.tn);
            let p = HeuristicSpec::Precision.evaluate(&c);
            assert!(HeuristicSpec::Precision.evaluate(&more_tp) >= p);
            assert!(HeuristicSpec::Precision.evaluate(&more_fp) <= p);
            let r = HeuristicSpec::Recall.evaluate(&c);
            let more_fn = ConfusionMatrix::new(c.tp, c.fp, c.fn_ + 1, c.tn);
            assert!(HeuristicSpec::Recall.evaluate(&more_tp) >= r);
            assert!(HeuristicSpec::Recall.evaluate(&more_fn) <= r);
        }
    }

    #[test]
    fn spec_string_grammar_round_trips() {
        for s in ["precision", "recall", "wra", "f:0.5", "f:2", "m:16", "m:0"] {
            let spec: HeuristicSpec = s.parse().unwrap();
            let again: HeuristicSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        for bad in ["", "prec", "f:", "m:-1", "f:nan", "m:", "laplace"] {
            assert!(bad.parse::<HeuristicSpec>().is_err(), "accepted {bad:?}");
        }
    }
}
