use serde::{Deserialize, Serialize};

use super::{Dataset, Mode};
use crate::error::Result;

/// Counts of current mode (rows: Car, Walk, Bike, Bus) by switching
/// decision (columns: 0, 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTab {
    pub counts: [[usize; 2]; 4],
}

impl CrossTab {
    pub fn get(&self, mode: Mode, decision: u8) -> usize {
        self.counts[mode.index()][decision as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("mode,stay,switch\n");
        for m in Mode::ALL {
            let [a, b] = self.counts[m.index()];
            s.push_str(&format!("{m},{a},{b}\n"));
        }
        s
    }
}

pub fn crosstab(data: &Dataset) -> Result<CrossTab> {
    let mut counts = [[0usize; 2]; 4];
    for (i, &y) in data.response().iter().enumerate() {
        counts[data.mode_of(i)?.index()][y as usize] += 1;
    }
    Ok(CrossTab { counts })
}
