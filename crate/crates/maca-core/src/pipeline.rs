//! Sequence <-> signal <-> bit-pattern transforms.
//!
//! Proteins become real-valued signals through a hydrophobicity lookup,
//! secondary-structure strings through a three-level code table. The
//! structure predictor identifies a linear filter relating a base
//! protein's signal to its encoded structure (least-squares deconvolution
//! over the Toeplitz system), convolves a target with that filter, and
//! thresholds the response back into helix/strand/coil. DNA and signals
//! bridge to the bit-level classifier through a 2-bit base code and
//! uniform quantization.

use std::fmt;

use crate::ca::CAState;
use crate::error::{Error, Result};

/// Bit-level classifier input; an alias to keep pipeline signatures
/// readable.
pub type BitPattern = CAState;

/// Kyte-Doolittle hydrophobicity, indexed by one-letter residue code.
const KYTE_DOOLITTLE: [(char, f64); 20] = [
    ('A', 1.8),
    ('R', -4.5),
    ('N', -3.5),
    ('D', -3.5),
    ('C', 2.5),
    ('Q', -3.5),
    ('E', -3.5),
    ('G', -0.4),
    ('H', -3.2),
    ('I', 4.5),
    ('L', 3.8),
    ('K', -3.9),
    ('M', 1.9),
    ('F', 2.8),
    ('P', -1.6),
    ('S', -0.8),
    ('T', -0.7),
    ('W', -0.9),
    ('Y', -1.3),
    ('V', 4.2),
];

/// Span of the Kyte-Doolittle scale, the natural quantization range for
/// hydrophobicity signals.
pub const HYDROPHOBICITY_RANGE: (f64, f64) = (-4.5, 4.5);

fn hydrophobicity(residue: char) -> Option<f64> {
    KYTE_DOOLITTLE
        .iter()
        .find(|(code, _)| *code == residue)
        .map(|(_, value)| *value)
}

/// A validated amino-acid sequence over the 20 standard one-letter codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AminoAcidSeq(String);

impl AminoAcidSeq {
    pub fn new(residues: &str) -> Result<Self> {
        for (i, c) in residues.chars().enumerate() {
            if hydrophobicity(c).is_none() {
                return Err(Error::InvalidInput(format!(
                    "invalid residue {c:?} at position {i}"
                )));
            }
        }
        Ok(Self(residues.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A helix/strand/coil string over {H, E, C}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureSeq(String);

impl StructureSeq {
    pub fn new(labels: &str) -> Result<Self> {
        for (i, c) in labels.chars().enumerate() {
            if !matches!(c, 'H' | 'E' | 'C') {
                return Err(Error::InvalidInput(format!(
                    "invalid structure label {c:?} at position {i} (expected H, E or C)"
                )));
            }
        }
        Ok(Self(labels.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for StructureSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A DNA sequence over {A, C, G, T}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NucleotideSeq(String);

impl NucleotideSeq {
    pub fn new(bases: &str) -> Result<Self> {
        for (i, c) in bases.chars().enumerate() {
            if !matches!(c, 'A' | 'C' | 'G' | 'T') {
                return Err(Error::InvalidInput(format!(
                    "invalid base {c:?} at position {i} (expected A, C, G or T)"
                )));
            }
        }
        Ok(Self(bases.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Numeric codes for the three structure classes, together with the
/// decoding bands: values in [0, helix] read as helix, values in
/// [strand, coil) as strand, everything else as coil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCodeTable {
    pub helix: f64,
    pub strand: f64,
    pub coil: f64,
}

impl StructureCodeTable {
    /// Default code assignment: 200/600/800.
    pub const PRIMARY: StructureCodeTable = StructureCodeTable {
        helix: 200.0,
        strand: 600.0,
        coil: 800.0,
    };

    /// Alternate code assignment: 300/700/900.
    pub const ALTERNATE: StructureCodeTable = StructureCodeTable {
        helix: 300.0,
        strand: 700.0,
        coil: 900.0,
    };
}

impl Default for StructureCodeTable {
    fn default() -> Self {
        Self::PRIMARY
    }
}

/// Element-wise hydrophobicity signal of a protein sequence.
pub fn hydrophobicity_encode(seq: &AminoAcidSeq) -> Vec<f64> {
    seq.0
        .chars()
        .map(|c| hydrophobicity(c).expect("sequence is validated"))
        .collect()
}

/// Structure string to numeric signal under `table`.
pub fn structure_encode_with(seq: &StructureSeq, table: &StructureCodeTable) -> Vec<f64> {
    seq.0
        .chars()
        .map(|c| match c {
            'H' => table.helix,
            'E' => table.strand,
            _ => table.coil,
        })
        .collect()
}

/// Structure string to numeric signal under the default 200/600/800 codes.
pub fn structure_encode(seq: &StructureSeq) -> Vec<f64> {
    structure_encode_with(seq, &StructureCodeTable::PRIMARY)
}

/// Numeric signal back to a structure string under `table`. Values at or
/// below the helix code decode as helix, values from the strand code up to
/// (but excluding) the coil code as strand, and everything else - negatives,
/// the coil code and beyond, NaN - as coil.
pub fn threshold_decode_with(signal: &[f64], table: &StructureCodeTable) -> StructureSeq {
    let labels: String = signal
        .iter()
        .map(|&v| {
            if (0.0..=table.helix).contains(&v) {
                'H'
            } else if v >= table.strand && v < table.coil {
                'E'
            } else {
                'C'
            }
        })
        .collect();
    StructureSeq(labels)
}

/// Numeric signal back to a structure string under the default codes.
pub fn threshold_decode(signal: &[f64]) -> StructureSeq {
    threshold_decode_with(signal, &StructureCodeTable::PRIMARY)
}

/// Full linear convolution; output length is `input.len() + taps.len() - 1`.
pub fn convolve(input: &[f64], taps: &[f64]) -> Result<Vec<f64>> {
    if input.is_empty() || taps.is_empty() {
        return Err(Error::InvalidParameter(
            "convolution operands must be non-empty".into(),
        ));
    }
    let mut out = vec![0.0; input.len() + taps.len() - 1];
    for (i, &x) in input.iter().enumerate() {
        for (j, &t) in taps.iter().enumerate() {
            out[i + j] += x * t;
        }
    }
    Ok(out)
}

/// Ridge weight keeping the normal equations solvable on ill-conditioned
/// inputs.
const DECONV_RIDGE: f64 = 1e-9;

/// Recovers the length-`m` filter minimizing `||convolve(ib, F) - ob||`.
///
/// `ob` is zero-padded or truncated to the full convolution length
/// `ib.len() + m - 1` first; the normal equations of the Toeplitz system
/// are then solved with a small ridge on the diagonal.
pub fn deconvolve(ob: &[f64], ib: &[f64], m: usize) -> Result<Vec<f64>> {
    if ib.is_empty() {
        return Err(Error::InvalidParameter(
            "input signal must be non-empty".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("filter length must be >= 1".into()));
    }
    if ib.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSystem);
    }
    let rows = ib.len() + m - 1;
    let mut padded = ob.to_vec();
    padded.resize(rows, 0.0);

    // Toeplitz column c holds ib shifted down by c rows; assemble
    // A^T A + ridge and A^T b directly.
    let a = |r: usize, c: usize| -> f64 {
        if r >= c && r - c < ib.len() {
            ib[r - c]
        } else {
            0.0
        }
    };
    let mut gram = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (i, gram_row) in gram.iter_mut().enumerate() {
        for (j, cell) in gram_row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for r in 0..rows {
                acc += a(r, i) * a(r, j);
            }
            *cell = acc;
        }
        gram_row[i] += DECONV_RIDGE;
        rhs[i] = (0..rows).map(|r| a(r, i) * padded[r]).sum();
    }
    solve_dense(gram, rhs)
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col] == 0.0 {
            return Err(Error::DegenerateSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (k, cell) in lower[0].iter_mut().enumerate().skip(col) {
                *cell -= factor * upper[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for col in (0..m).rev() {
        let mut acc = b[col];
        for k in col + 1..m {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// End-to-end structure prediction: identify the filter on the base pair,
/// apply it to the target, threshold the response.
pub fn predict_structure(
    base_protein: &AminoAcidSeq,
    base_structure: &StructureSeq,
    target: &AminoAcidSeq,
    m: usize,
    table: &StructureCodeTable,
) -> Result<StructureSeq> {
    if base_protein.len() != base_structure.len() {
        return Err(Error::DimensionMismatch {
            expected: base_protein.len(),
            got: base_structure.len(),
        });
    }
    if base_protein.is_empty() || target.is_empty() {
        return Err(Error::InvalidParameter(
            "base and target sequences must be non-empty".into(),
        ));
    }
    let response = predict_structure_signal(base_protein, base_structure, target, m, table)?;
    Ok(threshold_decode_with(&response, table))
}

/// The numeric response underlying [`predict_structure`], truncated to the
/// target length. Exposed for inspection dumps.
pub fn predict_structure_signal(
    base_protein: &AminoAcidSeq,
    base_structure: &StructureSeq,
    target: &AminoAcidSeq,
    m: usize,
    table: &StructureCodeTable,
) -> Result<Vec<f64>> {
    if base_protein.len() != base_structure.len() {
        return Err(Error::DimensionMismatch {
            expected: base_protein.len(),
            got: base_structure.len(),
        });
    }
    let ib = hydrophobicity_encode(base_protein);
    let ob = structure_encode_with(base_structure, table);
    let filter = deconvolve(&ob, &ib, m)?;
    let it = hydrophobicity_encode(target);
    let mut ot = convolve(&it, &filter)?;
    ot.truncate(target.len());
    Ok(ot)
}

/// 2-bit base code: A=00, C=01, G=10, T=11, concatenated left to right.
fn base_bits(base: char) -> (bool, bool) {
    match base {
        'A' => (false, false),
        'C' => (false, true),
        'G' => (true, false),
        _ => (true, true),
    }
}

/// Sliding-window 2-bit encoding of a DNA sequence; each window of `w`
/// bases becomes one pattern of width `2w`.
pub fn dna_encode(seq: &NucleotideSeq, w: usize, stride: usize) -> Result<Vec<BitPattern>> {
    if w == 0 || stride == 0 {
        return Err(Error::InvalidParameter(
            "window and stride must be >= 1".into(),
        ));
    }
    if seq.len() < w {
        return Err(Error::InvalidInput(format!(
            "sequence length {} is shorter than window {w}",
            seq.len()
        )));
    }
    let bases: Vec<char> = seq.0.chars().collect();
    let mut patterns = Vec::new();
    let mut offset = 0;
    while offset + w <= bases.len() {
        let mut bits = CAState::zeros(2 * w);
        for (k, &base) in bases[offset..offset + w].iter().enumerate() {
            let (hi, lo) = base_bits(base);
            bits.set(2 * k, hi);
            bits.set(2 * k + 1, lo);
        }
        patterns.push(bits);
        offset += stride;
    }
    Ok(patterns)
}

/// Number of windows [`dna_encode`] produces for a sequence of `len` bases.
pub fn window_count(len: usize, w: usize, stride: usize) -> usize {
    if len < w {
        0
    } else {
        (len - w) / stride + 1
    }
}

/// Uniform quantization of a real signal into `bits`-wide codes over
/// [lo, hi]. Values clamp to the range; a value sitting exactly on a bin
/// edge takes the bin it opens (rounds down through the scaling).
pub fn signal_quantize(signal: &[f64], bits: u32, lo: f64, hi: f64) -> Result<Vec<BitPattern>> {
    if bits == 0 || bits > 16 {
        return Err(Error::InvalidParameter(
            "bits per value must lie in 1..=16".into(),
        ));
    }
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "quantization range is empty: lo {lo}, hi {hi}"
        )));
    }
    let levels = 1u32 << bits;
    let mut out = Vec::with_capacity(signal.len());
    for &v in signal {
        let clamped = v.clamp(lo, hi);
        let mut code = (((clamped - lo) / (hi - lo)) * levels as f64).floor() as u32;
        if code >= levels {
            code = levels - 1;
        }
        let mut pattern = CAState::zeros(bits as usize);
        for k in 0..bits {
            pattern.set(k as usize, (code >> (bits - 1 - k)) & 1 == 1);
        }
        out.push(pattern);
    }
    Ok(out)
}

/// Concatenates fixed-width codes into one pattern, first code leftmost.
pub fn concat_patterns(codes: &[BitPattern]) -> Result<BitPattern> {
    if codes.is_empty() {
        return Err(Error::InvalidParameter("nothing to concatenate".into()));
    }
    let total: usize = codes.iter().map(|c| c.len()).sum();
    let mut out = CAState::zeros(total);
    let mut at = 0;
    for code in codes {
        for i in 0..code.len() {
            out.set(at + i, code.get(i));
        }
        at += code.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hydrophobicity_lookup() {
        assert!(hydrophobicity_encode(&AminoAcidSeq::new("").unwrap()).is_empty());
        assert_eq!(
            hydrophobicity_encode(&AminoAcidSeq::new("I").unwrap()),
            vec![4.5]
        );
        assert_eq!(
            hydrophobicity_encode(&AminoAcidSeq::new("GG").unwrap()),
            vec![-0.4, -0.4]
        );
    }

    #[test]
    fn invalid_residue_names_position() {
        let err = AminoAcidSeq::new("GIX").unwrap_err();
        assert!(err.to_string().contains("position 2"), "{err}");
    }

    #[test]
    fn structure_codes() {
        let encode = |s: &str| structure_encode(&StructureSeq::new(s).unwrap());
        assert_eq!(encode("H"), vec![200.0]);
        assert_eq!(encode("E"), vec![600.0]);
        assert_eq!(encode(""), Vec::<f64>::new());
        assert_eq!(encode("HEC"), vec![200.0, 600.0, 800.0]);
    }

    #[test]
    fn threshold_bands() {
        assert_eq!(threshold_decode(&[100.0]).as_str(), "H");
        assert_eq!(threshold_decode(&[700.0]).as_str(), "E");
        assert_eq!(threshold_decode(&[400.0, -5.0, 900.0]).as_str(), "CCC");
        assert_eq!(threshold_decode(&[f64::NAN]).as_str(), "C");
    }

    #[test]
    fn codec_round_trip_on_both_tables() {
        let seq = StructureSeq::new("HHECCEHC").unwrap();
        for table in [StructureCodeTable::PRIMARY, StructureCodeTable::ALTERNATE] {
            let decoded = threshold_decode_with(&structure_encode_with(&seq, &table), &table);
            assert_eq!(decoded, seq);
        }
    }

    #[test]
    fn convolution_basics() {
        assert_eq!(
            convolve(&[1.0, 2.0], &[1.0, 1.0]).unwrap(),
            vec![1.0, 3.0, 2.0]
        );
        let x = [3.0, -1.0, 2.0];
        assert_eq!(convolve(&x, &[1.0]).unwrap(), x.to_vec());
        assert_eq!(
            convolve(&[0.0, 0.0], &[4.0, 5.0]).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert!(convolve(&[], &[1.0]).is_err());
    }

    #[test]
    fn deconvolve_impulse_recovers_output() {
        let ob = [200.0, 600.0, 800.0, 200.0];
        let mut ib = vec![0.0; 4];
        ib[0] = 1.0;
        let f = deconvolve(&ob, &ib, 4).unwrap();
        for (got, want) in f.iter().zip(ob.iter()) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn deconvolve_rejects_zero_input() {
        assert!(matches!(
            deconvolve(&[1.0, 2.0], &[0.0, 0.0], 2),
            Err(Error::DegenerateSystem)
        ));
    }

    #[test]
    fn predict_structure_reports_length_mismatch() {
        let bp = AminoAcidSeq::new("GG").unwrap();
        let bs = StructureSeq::new("H").unwrap();
        let tp = AminoAcidSeq::new("G").unwrap();
        assert!(predict_structure(&bp, &bs, &tp, 2, &StructureCodeTable::PRIMARY).is_err());
    }

    #[test]
    fn predict_structure_single_residue() {
        let bp = AminoAcidSeq::new("I").unwrap();
        let bs = StructureSeq::new("H").unwrap();
        let ts = predict_structure(&bp, &bs, &bp, 1, &StructureCodeTable::PRIMARY).unwrap();
        assert_eq!(ts.as_str(), "H");
    }

    #[test]
    fn predict_structure_helix_base_self_prediction() {
        // With m=1 the fitted response is a scalar, and an all-helix base
        // reproduces itself exactly: the tiny ridge bias keeps values just
        // inside the closed [0, 200] helix band.
        let bp = AminoAcidSeq::new("GGGGGG").unwrap();
        let bs = StructureSeq::new("HHHHHH").unwrap();
        let ts = predict_structure(&bp, &bs, &bp, 1, &StructureCodeTable::PRIMARY).unwrap();
        assert_eq!(ts, bs);
    }

    #[test]
    fn predict_structure_output_matches_target_length() {
        let bp = AminoAcidSeq::new("GIVLMA").unwrap();
        let bs = StructureSeq::new("HHEECC").unwrap();
        for target in ["I", "GIV", "AAAAAAAAAA"] {
            let tp = AminoAcidSeq::new(target).unwrap();
            let ts = predict_structure(&bp, &bs, &tp, 5, &StructureCodeTable::PRIMARY).unwrap();
            assert_eq!(ts.len(), tp.len());
        }
    }

    #[test]
    fn dna_encode_examples() {
        let enc =
            |s: &str, w, stride| dna_encode(&NucleotideSeq::new(s).unwrap(), w, stride).unwrap();
        let single = enc("ACGT", 4, 1);
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].to_string(), "00011011");

        let double = enc("AAAA", 2, 2);
        assert_eq!(double.len(), 2);
        assert!(double.iter().all(|p| p.to_string() == "0000"));

        let windows = enc("ACGTAC", 4, 1);
        assert_eq!(windows.len(), 3);
        assert_eq!(windows[0], single[0]);
    }

    #[test]
    fn dna_encode_rejects_short_sequence() {
        let seq = NucleotideSeq::new("ACG").unwrap();
        assert!(dna_encode(&seq, 4, 1).is_err());
    }

    #[test]
    fn quantize_examples() {
        let one = signal_quantize(&[0.75], 1, 0.0, 1.0).unwrap();
        assert_eq!(one[0].to_string(), "1");
        let clamped = signal_quantize(&[-3.0], 3, 0.0, 1.0).unwrap();
        assert_eq!(clamped[0].to_string(), "000");
        let edge = signal_quantize(&[2.0], 2, 0.0, 4.0).unwrap();
        assert_eq!(edge[0].to_string(), "10");
        let top = signal_quantize(&[4.0], 2, 0.0, 4.0).unwrap();
        assert_eq!(top[0].to_string(), "11");
    }

    #[test]
    fn concat_patterns_orders_codes() {
        let codes = signal_quantize(&[0.0, 4.0, 2.0], 2, 0.0, 4.0).unwrap();
        let joined = concat_patterns(&codes).unwrap();
        assert_eq!(joined.to_string(), "001110");
    }

    proptest! {
        #[test]
        fn prop_codec_round_trip(labels in proptest::collection::vec(0u8..3, 1..40)) {
            let text: String = labels
                .iter()
                .map(|&l| ['H', 'E', 'C'][l as usize])
                .collect();
            let seq = StructureSeq::new(&text).unwrap();
            prop_assert_eq!(threshold_decode(&structure_encode(&seq)), seq);
        }

        #[test]
        fn prop_convolution_is_linear(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let len = rng.gen_range(1usize..10);
            let m = rng.gen_range(1usize..6);
            let draw = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> {
                (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect()
            };
            let x = draw(&mut rng, len);
            let y = draw(&mut rng, len);
            let f = draw(&mut rng, m);
            let a: f64 = rng.gen_range(-2.0..2.0);
            let lhs_input: Vec<f64> =
                x.iter().zip(&y).map(|(xv, yv)| a * xv + yv).collect();
            let lhs = convolve(&lhs_input, &f).unwrap();
            let cx = convolve(&x, &f).unwrap();
            let cy = convolve(&y, &f).unwrap();
            for ((l, xv), yv) in lhs.iter().zip(&cx).zip(&cy) {
                prop_assert!((l - (a * xv + yv)).abs() < 1e-12);
            }
        }

        #[test]
        fn prop_deconvolve_inverts_convolve(seed in 0u64..150) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(1usize..=8);
            let len = rng.gen_range(m..m + 12);
            let mut ib: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
            // Keep the leading tap strong so the system stays well
            // conditioned.
            ib[0] = if rng.gen() { 1.0 } else { -1.0 } * rng.gen_range(1.0..2.0);
            let f0: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ob = convolve(&ib, &f0).unwrap();
            let f = deconvolve(&ob, &ib, m).unwrap();
            for (got, want) in f.iter().zip(&f0) {
                prop_assert!((got - want).abs() < 1e-6, "{} vs {}", got, want);
            }
        }

        #[test]
        fn prop_window_count_formula(len in 1usize..40, w in 1usize..12, stride in 1usize..6) {
            prop_assume!(len >= w);
            let text: String = std::iter::repeat_n('A', len).collect();
            let seq = NucleotideSeq::new(&text).unwrap();
            let wins = dna_encode(&seq, w, stride).unwrap();
            prop_assert_eq!(wins.len(), (len - w) / stride + 1);
            prop_assert_eq!(wins.len(), window_count(len, w, stride));
        }
    }
}
