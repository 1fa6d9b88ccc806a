//! On-disk pure states: `{"n": 3, "amplitudes": [[re, im], ...]}`.

use std::fs;
use std::path::Path;

use mkent_core::{PureState, C64, MAX_QUBITS};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

/// What loading did to the stored amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadInfo {
    pub n: usize,
    pub norm_deviation: f64,
    pub renormalized: bool,
}

impl StateFile {
    pub fn from_state(psi: &PureState) -> Self {
        StateFile { n: psi.n(), amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
    }

    /// Checks `n` against the amplitude count and builds the state.
    /// Norms within `1e-6` of one are renormalized.
    pub fn to_state(&self) -> Result<(PureState, LoadInfo), CliError> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(CliError::Input(format!("n = {} is outside 1..={MAX_QUBITS}", self.n)));
        }
        let expected = 1usize << self.n;
        if self.amplitudes.len() != expected {
            return Err(CliError::Input(format!(
                "n = {} needs {expected} amplitudes, found {}",
                self.n,
                self.amplitudes.len()
            )));
        }
        let amps: Vec<C64> = self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = PureState::new(amps)?;
        let renormalized = psi.amplitudes().iter().zip(&self.amplitudes).any(|(z, &[re, im])| z.re != re || z.im != im);
        Ok((psi, LoadInfo { n: self.n, norm_deviation: (norm - 1.0).abs(), renormalized }))
    }
}
