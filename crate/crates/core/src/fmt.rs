//! Text formatting shared by every file writer.

/// Formats a float with 17 significant digits, enough for an exact round trip.
pub fn f64_exact(x: f64) -> String {
    if x == 0.0 {
        // keeps "-0" from leaking into files
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bit_exact() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 28.0] {
            let s = f64_exact(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
