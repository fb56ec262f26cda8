//! Edge-of-chaos instrumentation: normalized temporal entropy and adjacent
//! cell mutual information of a CA spacetime run.
//!
//! Both measures are plug-in estimators over the per-cell bit distributions
//! of a T x n bit matrix, in base-2 logs, so each lies in [0, 1].

use crate::ca::{step, BoundaryMode, CAState, RuleVector};
use crate::error::{Error, Result};

/// Reference saturation value emitted alongside diagnostic traces. Never
/// asserted; informational only.
pub const CRITICAL_ENTROPY_REFERENCE: f64 = 0.84;

/// A T x n bit matrix; rows are time steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacetimeRun {
    states: Vec<CAState>,
}

impl SpacetimeRun {
    /// Wraps an explicit matrix. Rows must be non-empty, equally wide, and
    /// number at least 2.
    pub fn from_states(states: Vec<CAState>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidParameter(
                "spacetime run needs at least 2 rows".into(),
            ));
        }
        let n = states[0].len();
        for row in &states {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        Ok(Self { states })
    }

    pub fn rows(&self) -> &[CAState] {
        &self.states
    }

    pub fn steps(&self) -> usize {
        self.states.len()
    }

    pub fn cells(&self) -> usize {
        self.states[0].len()
    }
}

/// Evolves `start` under `rules` for `steps` rows (the start row included).
pub fn spacetime_run(
    rules: &RuleVector,
    start: &CAState,
    boundary: BoundaryMode,
    steps: usize,
) -> Result<SpacetimeRun> {
    if steps < 2 {
        return Err(Error::InvalidParameter(
            "spacetime run needs at least 2 steps".into(),
        ));
    }
    let mut states = Vec::with_capacity(steps);
    states.push(start.clone());
    for _ in 1..steps {
        let next = step(states.last().unwrap(), rules, boundary)?;
        states.push(next);
    }
    Ok(SpacetimeRun { states })
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Mean over cells of the binary entropy of each cell's temporal bit
/// frequency. 0 for frozen runs, 1 when every cell is balanced.
pub fn entropy(run: &SpacetimeRun) -> f64 {
    let t = run.steps() as f64;
    let n = run.cells();
    let mut acc = 0.0;
    for i in 0..n {
        let ones = run.states.iter().filter(|row| row.get(i)).count() as f64;
        acc += binary_entropy(ones / t);
    }
    acc / n as f64
}

/// Mean over adjacent cell pairs of the mutual information (bits) of their
/// joint temporal distribution. Requires at least 2 cells.
pub fn mutual_information(run: &SpacetimeRun) -> Result<f64> {
    let n = run.cells();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "mutual information needs at least 2 cells".into(),
        ));
    }
    let t = run.steps() as f64;
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let mut joint = [[0usize; 2]; 2];
        for row in &run.states {
            joint[row.get(i) as usize][row.get(i + 1) as usize] += 1;
        }
        let px = (joint[1][0] + joint[1][1]) as f64 / t;
        let py = (joint[0][1] + joint[1][1]) as f64 / t;
        let mut mi = 0.0;
        for (x, row) in joint.iter().enumerate() {
            for (y, &count) in row.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let pxy = count as f64 / t;
                let marg =
                    (if x == 1 { px } else { 1.0 - px }) * (if y == 1 { py } else { 1.0 - py });
                mi += pxy * (pxy / marg).log2();
            }
        }
        // Plug-in MI is bounded by the smaller marginal entropy; clamp the
        // floating-point residue back into that range.
        acc += mi.clamp(0.0, binary_entropy(px).min(binary_entropy(py)));
    }
    Ok(acc / (n - 1) as f64)
}
