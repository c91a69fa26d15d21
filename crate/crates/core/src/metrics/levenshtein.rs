//! Character-level Levenshtein distance.
//!
//! Inputs whose shorter side fits in a machine word use the bit-parallel
//! algorithm of Myers as reformulated by Hyyrö for global edit distance;
//! longer inputs use a two-row dynamic program. Distances count Unicode
//! scalar values with unit insert, delete and substitute costs.

/// Per-character match masks for a pattern of at most 64 chars.
struct PatternMasks {
    ascii: [u64; 128],
    other: Vec<(char, u64)>,
}

impl PatternMasks {
    fn new(pattern: &[char]) -> Self {
        let mut ascii = [0u64; 128];
        let mut other: Vec<(char, u64)> = Vec::new();
        for (i, &c) in pattern.iter().enumerate() {
            let bit = 1u64 << i;
            if c.is_ascii() {
                ascii[c as usize] |= bit;
            } else if let Some(entry) = other.iter_mut().find(|(k, _)| *k == c) {
                entry.1 |= bit;
            } else {
                other.push((c, bit));
            }
        }
        Self { ascii, other }
    }

    #[inline]
    fn get(&self, c: char) -> u64 {
        if c.is_ascii() {
            self.ascii[c as usize]
        } else {
            self.other.iter().find(|(k, _)| *k == c).map_or(0, |e| e.1)
        }
    }
}

fn bit_parallel(pattern: &[char], text: &[char]) -> usize {
    let m = pattern.len();
    debug_assert!(m > 0 && m <= 64);
    let masks = PatternMasks::new(pattern);
    let high = 1u64 << (m - 1);
    let mut pv: u64 = u64::MAX;
    let mut mv: u64 = 0;
    let mut score = m;
    for &c in text {
        let eq = masks.get(c);
        let xv = eq | mv;
        let xh = ((eq & pv).wrapping_add(pv) ^ pv) | eq;
        let mut ph = mv | !(xh | pv);
        let mut mh = pv & xh;
        if ph & high != 0 {
            score += 1;
        } else if mh & high != 0 {
            score -= 1;
        }
        // the top row of the DP grows by one per text char
        ph = (ph << 1) | 1;
        mh <<= 1;
        pv = mh | !(xv | ph);
        mv = ph & xv;
    }
    score
}

fn two_row(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    edit_distance_chars(&a, &b)
}

pub fn edit_distance_chars(a: &[char], b: &[char]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    match short.len() {
        0 => long.len(),
        1..=64 => bit_parallel(short, long),
        _ => two_row(short, long),
    }
}

/// `1 / (1 + edit_distance)`, in (0, 1].
pub fn levenshtein_score(source: &str, output: &str) -> f64 {
    1.0 / (1.0 + edit_distance(source, output) as f64)
}
