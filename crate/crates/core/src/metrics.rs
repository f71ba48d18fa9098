//! Accuracy evaluation, traffic accounting and figures of merit.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::hdc::{mean_of, PrototypeModel};

/// Encoded evaluation split shared by every client.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub encoded: Array2<f64>,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Mean over clients of each personalized model's test accuracy.
    pub personalized: f64,
    /// Accuracy of the elementwise mean of all client models.
    pub consensus: f64,
}

/// Test accuracy of the personalized models and of their average.
pub fn evaluate(models: &[PrototypeModel], test: &TestSet) -> Result<Evaluation> {
    if test.labels.is_empty() {
        return Err(HdcError::Config(
            "cannot evaluate on an empty test set".into(),
        ));
    }
    if models.is_empty() {
        return Err(HdcError::Config("no models to evaluate".into()));
    }
    // Summing integer counts keeps the mean exact and order independent.
    let correct = models
        .par_iter()
        .map(|m| m.correct_count(test.encoded.view(), &test.labels))
        .collect::<Result<Vec<usize>>>()?;
    let personalized =
        correct.iter().sum::<usize>() as f64 / (models.len() * test.labels.len()) as f64;
    let consensus = PrototypeModel::from_array(mean_of(models.iter().map(|m| m.prototypes()))?)?
        .accuracy(test.encoded.view(), &test.labels)?;
    Ok(Evaluation {
        personalized,
        consensus,
    })
}

/// Bytes moved in one global epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTraffic {
    pub uplink: u64,
    pub downlink: u64,
}

/// `N · K · D̂ · B`: every client uploads its `K × D̂` sub-model once per round.
pub fn uplink_bytes_per_round(
    n_clients: usize,
    n_classes: usize,
    sub_dim: usize,
    bytes_per_element: u64,
) -> u64 {
    n_clients as u64 * n_classes as u64 * sub_dim as u64 * bytes_per_element
}

/// Per-round and cumulative uplink/downlink byte counts.
///
/// The aggregated sub-model broadcast counts `K · D̂ · B` per client. Index
/// sets are regenerated from the shared seed and cost nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficLedger {
    pub bytes_per_element: u64,
    pub rounds: Vec<RoundTraffic>,
    pub cumulative_uplink: u64,
    pub cumulative_downlink: u64,
}

impl TrafficLedger {
    pub fn new(bytes_per_element: u64) -> Self {
        Self {
            bytes_per_element,
            rounds: Vec::new(),
            cumulative_uplink: 0,
            cumulative_downlink: 0,
        }
    }

    pub fn record_round(
        &mut self,
        n_clients: usize,
        n_classes: usize,
        sub_dim: usize,
    ) -> RoundTraffic {
        let bytes = uplink_bytes_per_round(n_clients, n_classes, sub_dim, self.bytes_per_element);
        let round = RoundTraffic {
            uplink: bytes,
            downlink: bytes,
        };
        self.rounds.push(round);
        self.cumulative_uplink += round.uplink;
        self.cumulative_downlink += round.downlink;
        round
    }
}

/// One evaluated round, as written to the CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub epoch: usize,
    pub mean_personalized_acc: f64,
    pub consensus_acc: f64,
    pub uplink_bytes_cum: u64,
    pub downlink_bytes_cum: u64,
    pub mistakes_total: usize,
}

/// Accuracy and cumulative traffic over the evaluated rounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLog {
    pub rows: Vec<LogRow>,
}

impl ConvergenceLog {
    pub fn push(&mut self, row: LogRow) {
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Highest mean personalized accuracy over all evaluated rounds.
    pub fn max_personalized(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.mean_personalized_acc)
            .reduce(f64::max)
    }

    pub fn max_consensus(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.consensus_acc).reduce(f64::max)
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    /// See [`traffic_to_target`].
    pub fn traffic_to_target(&self, target: f64) -> Option<u64> {
        traffic_to_target(self, target)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| HdcError::Output(e.to_string()))?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "epoch",
                "mean_personalized_acc",
                "consensus_acc",
                "uplink_bytes_cum",
                "downlink_bytes_cum",
                "mistakes_total",
            ])
            .map_err(|e| HdcError::Output(e.to_string()))?;
        }
        w.flush().map_err(|e| HdcError::Output(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| HdcError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Cumulative uplink bytes at the first evaluated round whose mean
/// personalized accuracy reaches `target`, or `None` if it never does.
pub fn traffic_to_target(log: &ConvergenceLog, target: f64) -> Option<u64> {
    log.rows
        .iter()
        .find(|r| r.mean_personalized_acc >= target)
        .map(|r| r.uplink_bytes_cum)
}

/// `1 - proposed / baseline`; positive values are savings.
pub fn traffic_reduction(proposed_bytes: u64, baseline_bytes: u64) -> f64 {
    1.0 - proposed_bytes as f64 / baseline_bytes as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn row(epoch: usize, acc: f64, up: u64) -> LogRow {
        LogRow {
            epoch,
            mean_personalized_acc: acc,
            consensus_acc: acc,
            uplink_bytes_cum: up,
            downlink_bytes_cum: up,
            mistakes_total: 0,
        }
    }

    #[test]
    fn paper_scale_round_bytes() {
        assert_eq!(uplink_bytes_per_round(1, 10, 2500, 4), 100_000);
        let mut ledger = TrafficLedger::new(4);
        for _ in 0..100 {
            let r = ledger.record_round(20, 10, 2500);
            assert_eq!(r.uplink, 2_000_000);
        }
        assert_eq!(ledger.cumulative_uplink, 200_000_000);
        assert_eq!(ledger.cumulative_downlink, 200_000_000);
        assert_eq!(
            ledger.rounds.iter().map(|r| r.uplink).sum::<u64>(),
            ledger.cumulative_uplink
        );
    }

    #[test]
    fn full_submodel_matches_baseline_bytes() {
        let full = uplink_bytes_per_round(20, 10, 5000, 4);
        assert_eq!(full / uplink_bytes_per_round(20, 10, 5000, 4), 1);
        assert_eq!(full / uplink_bytes_per_round(20, 10, 1000, 4), 5);
    }

    #[test]
    fn target_lookup() {
        let mut log = ConvergenceLog::default();
        log.push(row(1, 0.5, 10));
        log.push(row(2, 0.8, 20));
        log.push(row(3, 0.7, 30));
        assert_eq!(traffic_to_target(&log, 0.0), Some(10));
        assert_eq!(traffic_to_target(&log, 0.75), Some(20));
        assert_eq!(traffic_to_target(&log, 1.01), None);
        assert_eq!(log.max_personalized(), Some(0.8));
        assert_eq!(traffic_reduction(25, 100), 0.75);
    }

    #[test]
    fn csv_columns() {
        let mut log = ConvergenceLog::default();
        log.push(row(1, 0.5, 10));
        let mut out = Vec::new();
        log.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "epoch,mean_personalized_acc,consensus_acc,uplink_bytes_cum,downlink_bytes_cum,mistakes_total\n1,0.5,0.5,10,10,0\n"
        );
        let mut out = Vec::new();
        ConvergenceLog::default().write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("epoch,"));
    }

    fn one_hot_test_set() -> (Vec<PrototypeModel>, TestSet) {
        let protos = Array2::from_shape_fn((10, 10), |(i, j)| if i == j { 1.0 } else { 0.0 });
        let model = PrototypeModel::from_array(protos.clone()).unwrap();
        (
            vec![model],
            TestSet {
                encoded: protos,
                labels: (0..10).collect(),
            },
        )
    }

    #[test]
    fn perfect_and_chance_accuracy() {
        let (models, test) = one_hot_test_set();
        let e = evaluate(&models, &test).unwrap();
        assert_eq!(e.personalized, 1.0);
        assert_eq!(e.consensus, 1.0);

        // A zero model predicts class 0 for everything.
        let constant = vec![PrototypeModel::zeros(10, 10)];
        let e = evaluate(&constant, &test).unwrap();
        assert!((e.personalized - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identical_models_agree() {
        let model = PrototypeModel::from_array(array![[1.0, 0.2], [0.1, 1.0]]).unwrap();
        let test = TestSet {
            encoded: array![[0.9, 0.1], [0.3, 0.8], [0.6, 0.5]],
            labels: vec![0, 1, 1],
        };
        let e = evaluate(&vec![model; 5], &test).unwrap();
        assert_eq!(e.personalized, e.consensus);
        assert!(evaluate(&[], &test).is_err());
        let empty = TestSet {
            encoded: Array2::zeros((0, 2)),
            labels: vec![],
        };
        assert!(matches!(
            evaluate(&[PrototypeModel::zeros(2, 2)], &empty),
            Err(HdcError::Config(_))
        ));
    }

    proptest! {
        #[test]
        fn ledger_matches_closed_form(n in 1usize..30, k in 1usize..12, d in 1usize..6000, b in 1u64..9, g in 0usize..50) {
            let mut ledger = TrafficLedger::new(b);
            for _ in 0..g {
                ledger.record_round(n, k, d);
            }
            prop_assert_eq!(ledger.cumulative_uplink, g as u64 * n as u64 * k as u64 * d as u64 * b);
        }

        #[test]
        fn target_is_monotone(accs in prop::collection::vec(0.0f64..1.0, 1..20), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let mut log = ConvergenceLog::default();
            for (i, a) in accs.iter().enumerate() {
                log.push(row(i + 1, *a, (i as u64 + 1) * 100));
            }
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            match (traffic_to_target(&log, lo), traffic_to_target(&log, hi)) {
                (Some(a), Some(b)) => prop_assert!(a <= b),
                (None, Some(_)) => prop_assert!(false, "lower target unreachable"),
                _ => {}
            }
        }
    }
}
