//! Small helpers for classical bit strings carried in protocol messages.

/// A classical bit string. Index 0 is the most significant bit when the
/// string is interpreted as an integer (entanglement-pair labels, oracle
/// inputs).
pub type BitString = Vec<bool>;

/// Interpret `bits` as an unsigned integer, `bits[0]` most significant.
pub fn bits_to_uint(bits: &[bool]) -> u64 {
    assert!(bits.len() <= 64, "bit string too long for u64");
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}

/// Expand `value` into `width` bits, most significant first.
pub fn uint_to_bits(value: u64, width: usize) -> BitString {
    assert!(width <= 64);
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Render a bit string as e.g. `"0110"`.
pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uint_round_trip() {
        for width in 0..10 {
            for v in 0..(1u64 << width) {
                assert_eq!(bits_to_uint(&uint_to_bits(v, width)), v);
            }
        }
    }

    #[test]
    fn msb_first() {
        assert_eq!(uint_to_bits(0b110, 3), vec![true, true, false]);
        assert_eq!(bits_to_uint(&[true, false]), 2);
        assert_eq!(format_bits(&[false, true, true]), "011");
    }
}
