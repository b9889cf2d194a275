//! Flag parsing helpers, CSV rendering, and atomic file writes.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use qmcomb::{DelayProfile, SpectralResponse, Waveform};

use crate::{CliError, CliResult};

/// `lo:hi:n` frequency-grid descriptor.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        };
        let lo = lo.parse::<f64>().map_err(|e| format!("grid lo: {e}"))?;
        let hi = hi.parse::<f64>().map_err(|e| format!("grid hi: {e}"))?;
        let n = n.parse::<usize>().map_err(|e| format!("grid n: {e}"))?;
        Ok(GridSpec { lo, hi, n })
    }
}

/// `lo:hi` band descriptor.
#[derive(Debug, Clone, Copy)]
pub struct BandSpec {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for BandSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi] = parts.as_slice() else {
            return Err(format!("expected lo:hi, got {s:?}"));
        };
        let lo = lo.parse::<f64>().map_err(|e| format!("band lo: {e}"))?;
        let hi = hi.parse::<f64>().map_err(|e| format!("band hi: {e}"))?;
        if !(lo < hi) {
            return Err(format!("band must satisfy lo < hi, got {s:?}"));
        }
        Ok(BandSpec { lo, hi })
    }
}

/// `sigma=S,center=C,detuning=D` pulse descriptor; every key optional.
/// An omitted center defaults to six widths after the window start so the
/// leading tail is negligible at the edge.
#[derive(Debug, Clone, Copy, Default)]
pub struct PulseSpec {
    pub sigma: Option<f64>,
    pub center: Option<f64>,
    pub detuning: Option<f64>,
}

impl FromStr for PulseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = PulseSpec::default();
        if s.is_empty() {
            return Ok(spec);
        }
        for item in s.split(',') {
            let Some((key, value)) = item.split_once('=') else {
                return Err(format!("expected key=value, got {item:?}"));
            };
            let value = value
                .parse::<f64>()
                .map_err(|e| format!("pulse {key}: {e}"))?;
            match key.trim() {
                "sigma" => spec.sigma = Some(value),
                "center" => spec.center = Some(value),
                "detuning" => spec.detuning = Some(value),
                other => return Err(format!("unknown pulse key {other:?}")),
            }
        }
        Ok(spec)
    }
}

/// Reads a file with the path attached to any error message.
pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes a file atomically: the content lands under a temporary name in
/// the destination directory and is renamed into place, so readers never
/// observe a half-written file.
pub fn write_atomic(path: &Path, content: &str) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut file = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    std::io::Write::write_all(&mut file, content.as_bytes())
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    file.persist(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Twelve significant digits, exponent notation: wide enough to round-trip
/// visually stable values, byte-stable across runs.
fn sig(value: f64) -> String {
    // Map negative zero to plain zero so exact cancellations print uniformly.
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.11e}")
}

/// Response CSV: one row per grid frequency. The normalized column is left
/// empty when the circuit has no delay reference (`T(0) = 0`).
pub fn response_csv(response: &SpectralResponse, profile: &DelayProfile) -> String {
    let mut csv = String::from("nu,re_S,im_S,phase_unwrapped,T,T_rel\n");
    for (i, &nu) in response.grid.values().iter().enumerate() {
        let rel = profile
            .t_rel
            .as_ref()
            .map(|rel| sig(rel[i]))
            .unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            sig(nu),
            sig(response.s[i].re),
            sig(response.s[i].im),
            sig(response.phase[i]),
            sig(profile.t[i]),
            rel
        );
    }
    csv
}

/// Waveform CSV: one row per time sample.
pub fn waveform_csv(waveform: &Waveform) -> String {
    let mut csv = String::from("t,re_a,im_a\n");
    for (i, sample) in waveform.samples.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{}",
            sig(waveform.time(i)),
            sig(sample.re),
            sig(sample.im)
        );
    }
    csv
}

/// Pretty JSON with a trailing newline, for byte-stable text outputs.
pub fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    text
}
