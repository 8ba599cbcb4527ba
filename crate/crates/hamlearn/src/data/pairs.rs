//! The flattened data-pair set `{x_k, xdot_k}` feeding the least squares
//! problem.

use sha2::{Digest, Sha256};

use crate::basis::DomainBox;
use crate::error::{Error, Result};
use crate::phase::{HamiltonianSystem, Trajectory};

use super::derivative::{central_diff, lsfit_denoise};
use super::plan::DenoiseConfig;

/// How to estimate `xdot` from a burst.
#[derive(Debug, Clone)]
pub enum DerivativeMethod {
    CentralDiff,
    LsFit(DenoiseConfig),
}

/// Where the pairs came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairProvenance {
    pub bursts: usize,
    pub outside_dropped: usize,
    pub restricted: bool,
}

/// `K` pairs of states and derivative estimates, stored flat (row `k` holds
/// `2d` state entries and `2d` derivative entries). The originating burst id
/// and sample time ride along for the interchange files.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPairSet {
    dim: usize,
    ids: Vec<u32>,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    tau_bound: Option<f64>,
    provenance: PairProvenance,
}

impl DataPairSet {
    pub fn from_rows(
        dim: usize,
        ids: Vec<u32>,
        times: Vec<f64>,
        states: Vec<f64>,
        derivs: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::Dimension(format!(
                "pair dimension must be even and positive, got {dim}"
            )));
        }
        let k = ids.len();
        if times.len() != k || states.len() != k * dim || derivs.len() != k * dim {
            return Err(Error::Dimension(
                "pair arrays disagree on the number of rows".into(),
            ));
        }
        if states.iter().chain(derivs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite entry in pair set".into()));
        }
        Ok(Self {
            dim,
            ids,
            times,
            states,
            derivs,
            tau_bound: None,
            provenance: PairProvenance::default(),
        })
    }

    pub fn count(&self) -> usize {
        self.ids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn derivative(&self, k: usize) -> &[f64] {
        &self.derivs[k * self.dim..(k + 1) * self.dim]
    }

    pub fn burst_id(&self, k: usize) -> u32 {
        self.ids[k]
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// Sup over pairs of the derivative discrepancy against the analytic
    /// right-hand side; only available when the truth was supplied.
    pub fn tau_bound(&self) -> Option<f64> {
        self.tau_bound
    }

    pub fn provenance(&self) -> &PairProvenance {
        &self.provenance
    }

    /// SHA-256 over the raw state/derivative bytes, little-endian, in row
    /// order: a stable provenance fingerprint for model files.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.count() as u64).to_le_bytes());
        hasher.update((self.dim as u64).to_le_bytes());
        for v in self.states.iter().chain(self.derivs.iter()) {
            hasher.update(v.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Scale every derivative by `s` (used by linearity checks).
    pub fn scale_derivatives(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.derivs {
            *v *= s;
        }
        out
    }
}

/// Flatten bursts into the pair set. States may be replaced by the
/// de-noising filter depending on the method; `restrict_to_box` drops pairs
/// outside the domain (counted in the provenance). Passing the truth system
/// (test/diagnostic mode) fills `tau_bound`.
pub fn assemble_pairs(
    bursts: &[Trajectory],
    method: &DerivativeMethod,
    domain: &DomainBox,
    restrict_to_box: bool,
    truth: Option<&HamiltonianSystem>,
) -> Result<DataPairSet> {
    if bursts.is_empty() {
        return Err(Error::EmptyData("no bursts to assemble".into()));
    }
    let dim = bursts[0].dim();
    if domain.dim() != dim {
        return Err(Error::Dimension(format!(
            "domain dimension {} does not match burst dimension {dim}",
            domain.dim()
        )));
    }
    let mut ids = Vec::new();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut derivs = Vec::new();
    let mut outside = 0usize;

    for (b, burst) in bursts.iter().enumerate() {
        if burst.dim() != dim {
            return Err(Error::Dimension(
                "bursts disagree on the phase-space dimension".into(),
            ));
        }
        let (used_states, derivatives): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match method {
            DerivativeMethod::CentralDiff => {
                let d = central_diff(burst)?;
                (
                    burst.states().iter().map(|s| s.values().to_vec()).collect(),
                    d,
                )
            }
            DerivativeMethod::LsFit(cfg) => {
                let (filtered, d) = lsfit_denoise(burst, cfg)?;
                (
                    filtered
                        .states()
                        .iter()
                        .map(|s| s.values().to_vec())
                        .collect(),
                    d,
                )
            }
        };
        for (j, (x, xdot)) in used_states.iter().zip(&derivatives).enumerate() {
            if restrict_to_box && !domain.contains(x, 1e-9) {
                outside += 1;
                continue;
            }
            ids.push(b as u32);
            times.push(burst.times()[j]);
            states.extend_from_slice(x);
            derivs.extend_from_slice(xdot);
        }
    }
    if ids.is_empty() {
        return Err(Error::EmptyData(format!(
            "all {outside} candidate pairs fell outside the box"
        )));
    }

    let tau_bound = truth.map(|sys| {
        let mut sup: f64 = 0.0;
        let mut rhs = vec![0.0; dim];
        for k in 0..ids.len() {
            let x = &states[k * dim..(k + 1) * dim];
            let xdot = &derivs[k * dim..(k + 1) * dim];
            sys.rhs_into(x, &mut rhs);
            let err: f64 = xdot
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            sup = sup.max(err);
        }
        sup
    });

    let mut set = DataPairSet::from_rows(dim, ids, times, states, derivs)?;
    set.tau_bound = tau_bound;
    set.provenance = PairProvenance {
        bursts: bursts.len(),
        outside_dropped: outside,
        restricted: restrict_to_box,
    };
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::StateVector;

    fn burst(times: &[f64], f: impl Fn(f64) -> Vec<f64>) -> Trajectory {
        let states = times
            .iter()
            .map(|&t| StateVector::new(f(t)).unwrap())
            .collect();
        Trajectory::new(times.to_vec(), states).unwrap()
    }

    #[test]
    fn counting_matches_the_burst_shape() {
        let b = burst(&[0.0, 0.1, 0.2], |t| vec![t, 1.0 - t]);
        let domain = DomainBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let pairs =
            assemble_pairs(&[b], &DerivativeMethod::CentralDiff, &domain, false, None).unwrap();
        assert_eq!(pairs.count(), 3);
        assert_eq!(pairs.dim(), 2);
        assert_eq!(pairs.burst_id(2), 0);
        assert_eq!(pairs.time(1), 0.1);
    }

    #[test]
    fn restriction_is_a_no_op_when_everything_is_inside() {
        let b = burst(&[0.0, 0.1, 0.2], |t| vec![t, -t]);
        let domain = DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let open =
            assemble_pairs(&[b.clone()], &DerivativeMethod::CentralDiff, &domain, false, None)
                .unwrap();
        let restricted =
            assemble_pairs(&[b], &DerivativeMethod::CentralDiff, &domain, true, None).unwrap();
        assert_eq!(open.count(), restricted.count());
        for k in 0..open.count() {
            assert_eq!(open.state(k), restricted.state(k));
            assert_eq!(open.derivative(k), restricted.derivative(k));
        }
    }

    #[test]
    fn restriction_drops_and_counts_outside_pairs() {
        let b = burst(&[0.0, 0.1, 0.2, 0.3, 0.4], |t| vec![10.0 * t, 0.5]);
        let domain = DomainBox::new(vec![-2.0, -1.0], vec![2.0, 1.0]).unwrap();
        let pairs =
            assemble_pairs(&[b], &DerivativeMethod::CentralDiff, &domain, true, None).unwrap();
        assert_eq!(pairs.count(), 3); // 10t <= 2 keeps t in {0, 0.1, 0.2}
        assert_eq!(pairs.provenance().outside_dropped, 2);
        assert!(pairs.provenance().restricted);
    }

    #[test]
    fn empty_result_after_restriction_is_an_error() {
        let b = burst(&[0.0, 0.1, 0.2], |t| vec![5.0 + t, 5.0]);
        let domain = DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        match assemble_pairs(&[b], &DerivativeMethod::CentralDiff, &domain, true, None) {
            Err(Error::EmptyData(_)) => {}
            other => panic!("expected empty-data error, got {other:?}"),
        }
    }

    #[test]
    fn truth_mode_reports_a_derivative_error_bound() {
        let sys = crate::phase::builtin_system("pendulum").unwrap();
        let u0 = StateVector::new(vec![1.0, 0.3]).unwrap();
        let traj = sys.integrate(&u0, 0.05, 0.5).unwrap();
        let domain = sys.default_domain().clone();
        let pairs = assemble_pairs(
            &[traj],
            &DerivativeMethod::CentralDiff,
            &domain,
            false,
            Some(&sys),
        )
        .unwrap();
        let tau = pairs.tau_bound().expect("truth provided");
        assert!(tau > 0.0 && tau < 0.05, "O(dt^2) bound expected, got {tau}");
    }

    #[test]
    fn content_hash_tracks_the_data() {
        let b = burst(&[0.0, 0.1, 0.2], |t| vec![t, 1.0]);
        let domain = DomainBox::new(vec![-1.0, -1.0], vec![1.0, 2.0]).unwrap();
        let pairs =
            assemble_pairs(&[b], &DerivativeMethod::CentralDiff, &domain, false, None).unwrap();
        let h1 = pairs.content_hash();
        assert_eq!(h1.len(), 64);
        assert_eq!(h1, pairs.content_hash());
        let scaled = pairs.scale_derivatives(2.0);
        assert_ne!(h1, scaled.content_hash());
    }
}
