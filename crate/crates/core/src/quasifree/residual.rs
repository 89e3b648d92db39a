use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::correlation::CorrelationMatrix;
use super::gibbs::FockDensity;
use super::wick::{det4_prediction, det8_prediction};
use crate::error::Result;
use crate::fock::{expectation, two_point_matrix, Ladder, StateVector};
use crate::linalg::C64;
use crate::output::{float, CsvWriter};

/// Schema id and columns of the residual CSV.
pub const RESIDUAL_SCHEMA: &str = "qboltz.residual.v1";
pub const RESIDUAL_COLUMNS: [&str; 5] = ["t", "lambda", "tuple_id", "kind", "abs_err"];

/// A state that can evaluate arbitrary ladder monomials exactly.
pub trait ExactState: Sync {
    fn modes(&self) -> usize;
    fn monomial(&self, ops: &[Ladder]) -> C64;
    fn correlation(&self) -> CorrelationMatrix;
}

impl ExactState for StateVector {
    fn modes(&self) -> usize {
        self.sector().modes()
    }
    fn monomial(&self, ops: &[Ladder]) -> C64 {
        expectation(self, ops)
    }
    fn correlation(&self) -> CorrelationMatrix {
        two_point_matrix(self)
    }
}

impl ExactState for FockDensity {
    fn modes(&self) -> usize {
        FockDensity::modes(self)
    }
    fn monomial(&self, ops: &[Ladder]) -> C64 {
        self.expectation(ops)
    }
    fn correlation(&self) -> CorrelationMatrix {
        self.two_point()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualKind {
    FourPoint,
    EightPoint,
}

impl ResidualKind {
    pub fn label(self) -> &'static str {
        match self {
            ResidualKind::FourPoint => "4pt",
            ResidualKind::EightPoint => "8pt",
        }
    }

    fn arity(self) -> usize {
        match self {
            ResidualKind::FourPoint => 4,
            ResidualKind::EightPoint => 8,
        }
    }
}

/// Which index tuples a residual is evaluated on.
///
/// A kind is enumerated exhaustively when `M^arity ≤ exhaustive_limit`;
/// otherwise `samples` tuples are drawn from a ChaCha stream seeded by `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleSpec {
    pub exhaustive_limit: u64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            exhaustive_limit: 1 << 16,
            samples: 200,
            seed: 0,
        }
    }
}

impl SampleSpec {
    /// Index tuples `(k₁, k₂, …, l₁, l₂, …)` with their ids.
    pub fn tuples(&self, modes: usize, kind: ResidualKind) -> Vec<(u64, Vec<usize>)> {
        let arity = kind.arity();
        let total = (modes as u64).checked_pow(arity as u32);
        match total {
            Some(total) if total <= self.exhaustive_limit => {
                (0..total).map(|id| (id, decode(id, modes, arity))).collect()
            }
            _ => {
                // one stream per kind so the 4- and 8-point samples are independent
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(arity as u64);
                (0..self.samples as u64)
                    .map(|id| (id, (0..arity).map(|_| rng.random_range(0..modes)).collect()))
                    .collect()
            }
        }
    }
}

fn decode(mut id: u64, modes: usize, arity: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(arity);
    for _ in 0..arity {
        out.push((id % modes as u64) as usize);
        id /= modes as u64;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualRecord {
    pub tuple_id: u64,
    pub kind: ResidualKind,
    pub indices: Vec<usize>,
    pub abs_err: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResidualReport {
    pub max4: f64,
    pub rms4: f64,
    pub max8: f64,
    pub rms8: f64,
    pub records: Vec<ResidualRecord>,
}

/// The exact `⟨α⁺_{k₁}α⁺_{k₂}α_{l₂}α_{l₁}⟩`.
pub fn exact_four_point(state: &impl ExactState, k: [usize; 2], l: [usize; 2]) -> C64 {
    use Ladder::*;
    state.monomial(&[Create(k[0]), Create(k[1]), Annihilate(l[1]), Annihilate(l[0])])
}

/// The exact `⟨α⁺_{k₁}α⁺_{k₂}α_{l₄}α_{l₃} α⁺_{k₃}α⁺_{k₄}α_{l₂}α_{l₁}⟩`.
pub fn exact_eight_point(state: &impl ExactState, k: [usize; 4], l: [usize; 4]) -> C64 {
    use Ladder::*;
    state.monomial(&[
        Create(k[0]),
        Create(k[1]),
        Annihilate(l[3]),
        Annihilate(l[2]),
        Create(k[2]),
        Create(k[3]),
        Annihilate(l[1]),
        Annihilate(l[0]),
    ])
}

fn residual(state: &impl ExactState, nu: &CorrelationMatrix, kind: ResidualKind, idx: &[usize]) -> f64 {
    match kind {
        ResidualKind::FourPoint => {
            let (k, l) = ([idx[0], idx[1]], [idx[2], idx[3]]);
            (exact_four_point(state, k, l) - det4_prediction(nu, k, l)).norm()
        }
        ResidualKind::EightPoint => {
            let k = [idx[0], idx[1], idx[2], idx[3]];
            let l = [idx[4], idx[5], idx[6], idx[7]];
            (exact_eight_point(state, k, l) - det8_prediction(nu, k, l)).norm()
        }
    }
}

/// Deviation of the exact four- and eight-point functions from the
/// determinants built on the state's own two-point function.
pub fn quasifreeness_residual(state: &impl ExactState, spec: &SampleSpec) -> ResidualReport {
    let nu = state.correlation();
    let mut report = ResidualReport::default();
    for kind in [ResidualKind::FourPoint, ResidualKind::EightPoint] {
        let tuples = spec.tuples(state.modes(), kind);
        let errs: Vec<f64> = tuples
            .par_iter()
            .map(|(_, idx)| residual(state, &nu, kind, idx))
            .collect();
        let max = errs.iter().copied().fold(0.0, f64::max);
        let rms = if errs.is_empty() {
            0.0
        } else {
            (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt()
        };
        match kind {
            ResidualKind::FourPoint => (report.max4, report.rms4) = (max, rms),
            ResidualKind::EightPoint => (report.max8, report.rms8) = (max, rms),
        }
        report.records.extend(
            tuples
                .into_iter()
                .zip(errs)
                .map(|((tuple_id, indices), abs_err)| ResidualRecord {
                    tuple_id,
                    kind,
                    indices,
                    abs_err,
                }),
        );
    }
    report
}

/// Append one report's records to a residual CSV.
pub fn write_residual_rows(out: &mut CsvWriter, t: f64, lambda: f64, report: &ResidualReport) -> Result<()> {
    for r in &report.records {
        out.row(&[
            float(t),
            float(lambda),
            r.tuple_id.to_string(),
            r.kind.label().to_string(),
            float(r.abs_err),
        ])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fock::FockSector;
    use crate::linalg::random_isometry;

    #[test]
    fn exhaustive_and_sampled_tuples() {
        let spec = SampleSpec::default();
        let four = spec.tuples(4, ResidualKind::FourPoint);
        assert_eq!(four.len(), 256);
        assert_eq!(four[1].1, vec![1, 0, 0, 0]);
        assert_eq!(spec.tuples(4, ResidualKind::EightPoint).len(), 65536);
        let sampled = spec.tuples(6, ResidualKind::EightPoint);
        assert_eq!(sampled.len(), 200);
        assert_eq!(sampled, spec.tuples(6, ResidualKind::EightPoint));
        assert!(sampled.iter().all(|(_, t)| t.iter().all(|&m| m < 6)));
    }

    #[test]
    fn slater_states_are_quasifree() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sector = Arc::new(FockSector::new(5, 2).unwrap());
        let u = random_isometry(&mut rng, 5, 2);
        let psi = StateVector::slater_orbitals(sector, &u).unwrap();
        let spec = SampleSpec {
            samples: 300,
            ..SampleSpec::default()
        };
        let report = quasifreeness_residual(&psi, &spec);
        assert!(report.max4 < 1e-12, "{}", report.max4);
        assert!(report.max8 < 1e-12, "{}", report.max8);
        assert_eq!(report.records.len(), 625 + 300);
    }
}
