//! Observation → input-activation encodings.

use crate::config::Encoding;
use crate::env::Observation;

/// Number of input values the encoding produces for an observation of
/// `dims` dimensions.
pub fn encoded_len(enc: Encoding, dims: usize) -> usize {
    match enc {
        Encoding::Direct | Encoding::Frame => dims,
        Encoding::Population { bins } => dims * bins,
    }
}

/// Encode into `out` (cleared first).
///
/// * `Direct`/`Frame`: values pass through unchanged; they are expected to
///   lie in [0, 1] already.
/// * `Population`: each dimension is min–max normalized by its bounds and
///   lights exactly one of `bins` one-hot inputs.
pub fn encode(enc: Encoding, obs: &Observation, out: &mut Vec<f64>) {
    out.clear();
    match enc {
        Encoding::Direct | Encoding::Frame => out.extend_from_slice(&obs.values),
        Encoding::Population { bins } => {
            out.resize(obs.values.len() * bins, 0.0);
            for (d, (&v, &(lo, hi))) in obs.values.iter().zip(&obs.bounds).enumerate() {
                let span = hi - lo;
                let norm = if span > 0.0 {
                    ((v - lo) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let bin = ((norm * bins as f64).floor() as usize).min(bins - 1);
                out[d * bins + bin] = 1.0;
            }
        }
    }
}
