use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graded temporal mesh `t_k = T (k / M)^r`, `k = 0..M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeshSpec", into = "MeshSpec")]
pub struct TemporalMesh {
    intervals: usize,
    t_final: f64,
    grading: f64,
    nodes: Vec<f64>,
}

/// The three numbers that define a mesh, as they appear in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(rename = "M")]
    pub intervals: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "uniform")]
    pub r: f64,
}

fn uniform() -> f64 {
    1.0
}

impl TryFrom<MeshSpec> for TemporalMesh {
    type Error = Error;
    fn try_from(s: MeshSpec) -> Result<Self> {
        TemporalMesh::new(s.intervals, s.t_final, s.r)
    }
}

impl From<TemporalMesh> for MeshSpec {
    fn from(m: TemporalMesh) -> Self {
        MeshSpec {
            intervals: m.intervals,
            t_final: m.t_final,
            r: m.grading,
        }
    }
}

impl TemporalMesh {
    pub fn new(intervals: usize, t_final: f64, grading: f64) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::domain("TemporalMesh", "at least one interval is required"));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::domain("TemporalMesh", format!("final time {t_final} must be positive")));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::domain("TemporalMesh", format!("grading {grading} must be >= 1")));
        }
        let mf = intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|k| t_final * (k as f64 / mf).powf(grading))
            .collect();
        nodes[intervals] = t_final;
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("TemporalMesh", "mesh nodes are not strictly increasing"));
        }
        Ok(Self {
            intervals,
            t_final,
            grading,
            nodes,
        })
    }

    pub fn uniform(intervals: usize, t_final: f64) -> Result<Self> {
        Self::new(intervals, t_final, 1.0)
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// Length of interval `k` (1-based).
    pub fn tau(&self, k: usize) -> f64 {
        self.nodes[k] - self.nodes[k - 1]
    }

    /// `t_{k-1} + theta tau_k`.
    pub fn collocation_time(&self, k: usize, theta: f64) -> f64 {
        if theta == 1.0 {
            self.nodes[k]
        } else {
            self.nodes[k - 1] + theta * self.tau(k)
        }
    }

    /// Interval `k` (1-based) with `t_{k-1} <= t <= t_k`; the first such.
    pub fn locate(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t <= self.t_final) {
            return Err(Error::OutOfRange {
                value: t,
                lo: 0.0,
                hi: self.t_final,
            });
        }
        let idx = self.nodes.partition_point(|&x| x < t);
        Ok(idx.max(1))
    }
}
