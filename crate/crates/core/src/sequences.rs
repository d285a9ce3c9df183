//! Spreading sequences, generators and the sequence-set file format.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::{Error, Result};

/// Relative tolerance on `Σ|s_n|² = N`.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Number of sequences in the length-31 Gold family.
pub const GOLD_FAMILY_SIZE: usize = 33;

/// Length of the generated Gold sequences.
pub const GOLD_LENGTH: usize = 31;

/// A length-`N` complex chip vector with `‖s‖² = N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingSequence {
    chips: Vec<Complex64>,
}

impl SpreadingSequence {
    /// Wraps chips that already satisfy the power constraint.
    pub fn new(chips: Vec<Complex64>) -> Result<Self> {
        let n = chips.len();
        if n < 2 {
            return Err(Error::TooShort(n));
        }
        let energy: f64 = chips.iter().map(|c| c.norm_sqr()).sum();
        if !energy.is_finite() || (energy - n as f64).abs() > NORM_TOLERANCE * n as f64 {
            return Err(Error::NotNormalized { n, energy });
        }
        Ok(Self { chips })
    }

    /// Builds a ±1 sequence; never fails for `len >= 2`.
    pub fn from_signs(signs: impl IntoIterator<Item = bool>) -> Result<Self> {
        Self::new(
            signs
                .into_iter()
                .map(|neg| Complex64::new(if neg { -1.0 } else { 1.0 }, 0.0))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn chips(&self) -> &[Complex64] {
        &self.chips
    }

    pub fn into_chips(self) -> Vec<Complex64> {
        self.chips
    }

    pub fn energy(&self) -> f64 {
        self.chips.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The same sequence rotated so its largest-modulus chip is real and
    /// nonnegative.
    pub fn canonical(&self) -> Self {
        let mut chips = self.chips.clone();
        crate::eigen::canonicalize_phase(&mut chips);
        Self { chips }
    }

    /// Euclidean distance between the chip vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.chips
            .iter()
            .zip(&other.chips)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Scales `raw` by `√N / ‖raw‖`.
pub fn normalize(raw: &[Complex64]) -> Result<SpreadingSequence> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::TooShort(n));
    }
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let scale = (n as f64).sqrt() / norm;
    SpreadingSequence::new(raw.iter().map(|c| c * scale).collect())
}

/// `K` sequences sharing a common length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    sequences: Vec<SpreadingSequence>,
}

impl SequenceSet {
    pub fn new(sequences: Vec<SpreadingSequence>) -> Result<Self> {
        let first = sequences
            .first()
            .ok_or_else(|| Error::InvalidParameter("a sequence set needs at least one user".into()))?;
        let n = first.len();
        if let Some(bad) = sequences.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        Ok(Self { sequences })
    }

    /// Number of users `K`.
    pub fn users(&self) -> usize {
        self.sequences.len()
    }

    /// Common sequence length `N`.
    pub fn chip_len(&self) -> usize {
        self.sequences[0].len()
    }

    pub fn sequences(&self) -> &[SpreadingSequence] {
        &self.sequences
    }

    /// Sequence of user `i` (0-based).
    pub fn get(&self, i: usize) -> Result<&SpreadingSequence> {
        self.sequences
            .get(i)
            .ok_or(Error::IndexOutOfRange { index: i, users: self.users() })
    }

    pub(crate) fn check_user(&self, i: usize) -> Result<()> {
        self.get(i).map(|_| ())
    }

    /// Replaces user `i`'s sequence in place.
    pub fn replace(&mut self, i: usize, seq: SpreadingSequence) -> Result<()> {
        self.check_user(i)?;
        if seq.len() != self.chip_len() {
            return Err(Error::DimensionMismatch { expected: self.chip_len(), got: seq.len() });
        }
        self.sequences[i] = seq;
        Ok(())
    }

    /// Copy with user `i`'s sequence replaced.
    pub fn with_replaced(&self, i: usize, seq: SpreadingSequence) -> Result<Self> {
        let mut out = self.clone();
        out.replace(i, seq)?;
        Ok(out)
    }

    /// Serializes to `{"N": .., "K": .., "sequences": [[[re, im], ..], ..]}`
    /// with every number printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{{\n  \"N\": {},\n  \"K\": {},\n  \"sequences\": [", self.chip_len(), self.users());
        for (k, seq) in self.sequences.iter().enumerate() {
            out.push_str(if k == 0 { "\n    [" } else { ",\n    [" });
            for (n, c) in seq.chips().iter().enumerate() {
                if n > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "[{:.16e}, {:.16e}]", c.re, c.im);
            }
            out.push(']');
        }
        out.push_str("\n  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "N")]
            n: usize,
            #[serde(rename = "K")]
            k: usize,
            sequences: Vec<Vec<[f64; 2]>>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if raw.sequences.len() != raw.k {
            return Err(Error::Format(format!(
                "K = {} but {} sequences present",
                raw.k,
                raw.sequences.len()
            )));
        }
        let sequences = raw
            .sequences
            .into_iter()
            .map(|chips| {
                if chips.len() != raw.n {
                    return Err(Error::Format(format!(
                        "N = {} but a sequence has {} chips",
                        raw.n,
                        chips.len()
                    )));
                }
                SpreadingSequence::new(chips.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sequences)
    }
}

/// Fibonacci LFSR output over one period: `a[t+deg] = ⊕ a[t+e]` for each
/// lower exponent `e` of the characteristic polynomial; register starts all ones.
fn lfsr_period(deg: usize, lower_exponents: &[usize]) -> Vec<bool> {
    let len = (1usize << deg) - 1;
    let mut a = vec![true; deg];
    while a.len() < len {
        let t = a.len() - deg;
        let bit = lower_exponents.iter().fold(false, |acc, &e| acc ^ a[t + e]);
        a.push(bit);
    }
    a
}

/// The degree-5 preferred pair: `x⁵+x²+1` and `x⁵+x⁴+x³+x²+1`.
fn preferred_pair() -> (Vec<bool>, Vec<bool>) {
    (lfsr_period(5, &[0, 2]), lfsr_period(5, &[0, 2, 3, 4]))
}

/// First `count` members of the length-31 Gold family.
///
/// Order: the two m-sequences `u`, `v`, then `u ⊕ Tʲv` for `j = 0..31`, where
/// `Tʲ` cyclically advances `v` by `j` chips. Bit `b` maps to chip `(-1)ᵇ`.
pub fn gold_codes(count: usize) -> Result<SequenceSet> {
    if !(1..=GOLD_FAMILY_SIZE).contains(&count) {
        return Err(Error::CountOutOfRange(count));
    }
    let (u, v) = preferred_pair();
    let n = u.len();
    let family = std::iter::once(u.clone())
        .chain(std::iter::once(v.clone()))
        .chain((0..n).map(|shift| (0..n).map(|t| u[t] ^ v[(t + shift) % n]).collect()));
    let sequences = family
        .take(count)
        .map(SpreadingSequence::from_signs)
        .collect::<Result<Vec<_>>>()?;
    SequenceSet::new(sequences)
}

/// `K` independent uniform ±1 sequences of length `N`, deterministic in `seed`.
pub fn random_sequences(users: usize, len: usize, seed: u64) -> Result<SequenceSet> {
    if users < 1 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if len < 2 {
        return Err(Error::TooShort(len));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sequences = (0..users)
        .map(|_| SpreadingSequence::from_signs((0..len).map(|_| rng.random::<bool>()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    SequenceSet::new(sequences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, prop_assume, proptest};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn signs(seq: &SpreadingSequence) -> Vec<i32> {
        seq.chips().iter().map(|c| c.re as i32).collect()
    }

    #[test]
    fn normalize_examples() {
        let ones = normalize(&[c(1.0, 0.0); 4]).unwrap();
        assert_eq!(ones.chips(), &[c(1.0, 0.0); 4]);

        let two = normalize(&[c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((two.chips()[0].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(two.chips()[1], c(0.0, 0.0));

        let raw = [c(1.0, 1.0), c(1.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)];
        let s = normalize(&raw).unwrap();
        for (a, b) in s.chips().iter().zip(&raw) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn normalize_rejects_zero() {
        assert_eq!(normalize(&[c(0.0, 0.0); 3]), Err(Error::ZeroVector));
        assert_eq!(normalize(&[c(1.0, 0.0)]), Err(Error::TooShort(1)));
    }

    #[test]
    fn new_checks_energy() {
        assert!(matches!(
            SpreadingSequence::new(vec![c(1.0, 0.0), c(0.5, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn first_gold_code_is_an_m_sequence() {
        let set = gold_codes(1).unwrap();
        let s = signs(&set.sequences()[0]);
        assert_eq!(s.len(), 31);
        let oracle_bits = cdma_oracle::m_sequence(5, &[0, 2], 31);
        let oracle: Vec<i32> = oracle_bits.iter().map(|&b| if b == 1 { -1 } else { 1 }).collect();
        assert_eq!(s, oracle);
        for shift in 1..31 {
            assert_eq!(cdma_oracle::periodic_xcorr(&s, &s, shift), -1, "shift {shift}");
        }
    }

    #[test]
    fn gold_family_is_three_valued_and_distinct() {
        let set = gold_codes(33).unwrap();
        let all: Vec<Vec<i32>> = set.sequences().iter().map(signs).collect();
        for a in 0..all.len() {
            for b in 0..all.len() {
                if a == b {
                    continue;
                }
                assert_ne!(all[a], all[b]);
                for shift in 0..31 {
                    let v = cdma_oracle::periodic_xcorr(&all[a], &all[b], shift);
                    assert!([-1, -9, 7].contains(&v), "pair ({a},{b}) shift {shift}: {v}");
                }
            }
        }
    }

    #[test]
    fn gold_count_bounds() {
        assert_eq!(gold_codes(0), Err(Error::CountOutOfRange(0)));
        assert_eq!(gold_codes(34), Err(Error::CountOutOfRange(34)));
        let seven = gold_codes(7).unwrap();
        assert_eq!((seven.users(), seven.chip_len()), (7, 31));
        assert_eq!(seven.sequences(), &gold_codes(33).unwrap().sequences()[..7]);
    }

    #[test]
    fn random_sequences_are_deterministic() {
        assert_eq!(random_sequences(1, 4, 9).unwrap(), random_sequences(1, 4, 9).unwrap());
        let set = random_sequences(7, 31, 3).unwrap();
        assert_eq!((set.users(), set.chip_len()), (7, 31));
        assert_ne!(set, random_sequences(7, 31, 4).unwrap());
    }

    #[test]
    fn set_rejects_mixed_lengths() {
        let a = normalize(&[c(1.0, 0.0); 3]).unwrap();
        let b = normalize(&[c(1.0, 0.0); 4]).unwrap();
        assert!(matches!(SequenceSet::new(vec![a, b]), Err(Error::DimensionMismatch { .. })));
        assert!(SequenceSet::new(vec![]).is_err());
    }

    #[test]
    fn json_rejects_inconsistent_header() {
        let text = r#"{"N": 2, "K": 2, "sequences": [[[1,0],[1,0]]]}"#;
        assert!(matches!(SequenceSet::from_json(text), Err(Error::Format(_))));
        let text = r#"{"N": 2, "K": 1, "sequences": [[[1,0],[3,0]]]}"#;
        assert!(matches!(SequenceSet::from_json(text), Err(Error::NotNormalized { .. })));
    }

    proptest! {
        #[test]
        fn normalize_meets_power_constraint(raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..40)) {
            let raw: Vec<Complex64> = raw.into_iter().map(|(a, b)| c(a, b)).collect();
            prop_assume!(raw.iter().any(|z| z.norm() > 1e-6));
            let s = normalize(&raw).unwrap();
            let n = raw.len() as f64;
            prop_assert!((s.energy() - n).abs() <= NORM_TOLERANCE * n);
        }

        #[test]
        fn json_round_trip_is_bit_exact(k in 1usize..5, n in 2usize..12, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seqs = (0..k)
                .map(|_| {
                    let raw: Vec<Complex64> = (0..n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
                    normalize(&raw).unwrap()
                })
                .collect();
            let set = SequenceSet::new(seqs).unwrap();
            let back = SequenceSet::from_json(&set.to_json()).unwrap();
            for (a, b) in set.sequences().iter().zip(back.sequences()) {
                for (x, y) in a.chips().iter().zip(b.chips()) {
                    prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                    prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
            }
        }
    }
}
