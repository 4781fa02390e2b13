use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linalg::{isospectral_witness, SquareMatrix};

/// Accepted states of an integration, with step statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SquareMatrix>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_field_norm: f64,
}

/// Summary written next to a trajectory CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: usize,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_time: f64,
    pub final_field_norm: f64,
    pub isospectral_drift: f64,
    pub initial_power_traces: Vec<f64>,
    pub final_power_traces: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn start(x0: SquareMatrix) -> Self {
        Trajectory {
            times: vec![0.0],
            states: vec![x0],
            accepted_steps: 0,
            rejected_steps: 0,
            final_field_norm: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial(&self) -> &SquareMatrix {
        &self.states[0]
    }

    pub fn last(&self) -> &SquareMatrix {
        self.states
            .last()
            .expect("trajectories hold the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectories hold the initial time")
    }

    /// Largest relative change of any power trace along the trajectory.
    pub fn isospectral_drift(&self) -> f64 {
        let start = isospectral_witness(self.initial());
        self.states
            .iter()
            .map(|s| start.max_relative_drift(&isospectral_witness(s)))
            .fold(0.0, f64::max)
    }

    /// Largest value of `f` over the states.
    pub fn max_over_states(&self, f: impl Fn(&SquareMatrix) -> f64) -> f64 {
        self.states.iter().map(f).fold(0.0, f64::max)
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            n: self.initial().n(),
            samples: self.len(),
            accepted_steps: self.accepted_steps,
            rejected_steps: self.rejected_steps,
            final_time: self.final_time(),
            final_field_norm: self.final_field_norm,
            isospectral_drift: self.isospectral_drift(),
            initial_power_traces: isospectral_witness(self.initial()).power_traces,
            final_power_traces: isospectral_witness(self.last()).power_traces,
        }
    }

    /// CSV with header `t,e11,e12,...,enn` and one row per accepted state.
    /// Numbers use the shortest representation that parses back exactly.
    pub fn to_csv(&self) -> String {
        let n = self.initial().n();
        let mut out = String::from("t");
        for i in 1..=n {
            for j in 1..=n {
                write!(out, ",e{i}{j}").unwrap();
            }
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(out, "{t:?}").unwrap();
            for v in s.as_slice() {
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV written by [`Trajectory::to_csv`] back into times and
    /// states (step statistics are not part of the CSV).
    pub fn from_csv(text: &str) -> Result<(Vec<f64>, Vec<SquareMatrix>), String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty CSV")?;
        let columns = header.split(',').count();
        let n = ((columns - 1) as f64).sqrt().round() as usize;
        if n * n + 1 != columns || !header.starts_with("t,") {
            return Err(format!(
                "header has {columns} columns, expected t plus n² entries"
            ));
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (row, line) in lines.enumerate() {
            let values = line
                .split(',')
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| format!("row {}: cannot parse {s:?}", row + 2))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != columns {
                return Err(format!("row {} has {} fields", row + 2, values.len()));
            }
            times.push(values[0]);
            states.push(SquareMatrix::from_fn(n, |i, j| values[1 + i * n + j]));
        }
        Ok((times, states))
    }
}
