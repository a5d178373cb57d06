use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled trajectory. States are stored up to the death time; every later
/// grid point is dead, so a path can never come back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub death_time: Option<f64>,
}

impl Path {
    pub fn state(&self, i: usize) -> Option<&[f64]> {
        self.states.get(i).map(|v| v.as_slice())
    }

    pub fn is_dead(&self) -> bool {
        self.death_time.is_some()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        if self.states.len() == self.times.len() {
            self.states.last().map(|v| v.as_slice())
        } else {
            None
        }
    }

    /// Columns `t, x1..xn, dead`; dead rows carry `nan` states.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let n = self.states.first().map(|s| s.len()).unwrap_or(0);
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.push("dead".into());
        let io = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
        wr.write_record(&header).map_err(io)?;
        for (i, &t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t}")];
            match self.state(i) {
                Some(x) => {
                    row.extend(x.iter().map(|v| format!("{v}")));
                    row.push("0".into());
                }
                None => {
                    row.extend((0..n).map(|_| "nan".to_string()));
                    row.push("1".into());
                }
            }
            wr.write_record(&row).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(())
    }
}
