//! LZ78 bit costs as a computable stand-in for complexity estimates on long
//! strings.
//!
//! The parser walks a binary phrase trie: each token is the longest known
//! phrase plus one new bit, except possibly the last, which may be a bare
//! reference when the input ends inside a known phrase. The `i`-th token
//! (1-indexed) of a parse over a dictionary primed with `d0` phrases costs
//! `ceil(log2(d0 + i))` bits for the reference plus one bit for the literal.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error)]
pub enum LzError {
    #[error("normalized compression distance is undefined when both inputs are empty")]
    BothEmpty,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: invalid character {ch:?} (expected 0/1 lines)")]
    CorpusFormat {
        path: PathBuf,
        line: usize,
        ch: char,
    },
    #[error("corpus directory {0} contains no files")]
    EmptyCorpus(PathBuf),
}

const NO_CHILD: u32 = 0;

/// Binary trie of phrases. Node 0 is the empty phrase; node `k` is the
/// `k`-th phrase inserted, so node ids double as reference indices.
#[derive(Debug, Clone)]
pub struct PhraseDictionary {
    children: Vec<[u32; 2]>,
    /// `(parent, last bit)` for every non-root node.
    links: Vec<(u32, bool)>,
}

impl Default for PhraseDictionary {
    fn default() -> Self {
        PhraseDictionary {
            children: vec![[NO_CHILD; 2]],
            links: vec![(0, false)],
        }
    }
}

impl PhraseDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// The dictionary left behind by parsing `y`.
    pub fn primed(y: &BitString) -> Self {
        let mut dict = Self::new();
        dict.parse(y);
        dict
    }

    /// Number of phrases, excluding the empty root.
    pub fn len(&self) -> usize {
        self.children.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn child(&self, node: u32, bit: bool) -> Option<u32> {
        match self.children[node as usize][bit as usize] {
            NO_CHILD => None,
            c => Some(c),
        }
    }

    fn insert(&mut self, parent: u32, bit: bool) -> u32 {
        let id = self.children.len() as u32;
        self.children.push([NO_CHILD; 2]);
        self.links.push((parent, bit));
        self.children[parent as usize][bit as usize] = id;
        id
    }

    /// The bits of phrase `node`.
    pub fn phrase(&self, mut node: u32) -> BitString {
        let mut rev = Vec::new();
        while node != 0 {
            let (parent, bit) = self.links[node as usize];
            rev.push(bit);
            node = parent;
        }
        rev.into_iter().rev().collect()
    }

    /// Parses `x`, growing the dictionary as LZ78 does.
    pub fn parse(&mut self, x: &BitString) -> Vec<Token> {
        let bits = x.as_slice();
        let mut tokens = Vec::new();
        let mut pos = 0;
        while pos < bits.len() {
            let mut node = 0;
            while pos < bits.len() {
                match self.child(node, bits[pos]) {
                    Some(c) => {
                        node = c;
                        pos += 1;
                    }
                    None => break,
                }
            }
            if pos == bits.len() {
                tokens.push(Token {
                    reference: node,
                    literal: None,
                });
                break;
            }
            let bit = bits[pos];
            self.insert(node, bit);
            tokens.push(Token {
                reference: node,
                literal: Some(bit),
            });
            pos += 1;
        }
        tokens
    }
}

/// One emitted LZ78 token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    /// Index of the matched phrase, 0 for the empty phrase.
    pub reference: u32,
    /// `None` only for a terminal bare reference.
    pub literal: Option<bool>,
}

fn ceil_log2(n: u64) -> u64 {
    debug_assert!(n >= 1);
    u64::from(64 - (n - 1).leading_zeros())
}

/// Bit cost of a token stream parsed over a dictionary of `d0` phrases.
pub fn token_cost(tokens: &[Token], d0: usize) -> u64 {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| ceil_log2((d0 + i + 1) as u64) + u64::from(t.literal.is_some()))
        .sum()
}

/// Reconstructs the input from tokens, given the dictionary the parse
/// started from.
pub fn decode(tokens: &[Token], mut dict: PhraseDictionary) -> BitString {
    let mut out = BitString::new();
    for t in tokens {
        out.extend_from(&dict.phrase(t.reference));
        if let Some(bit) = t.literal {
            out.push(bit);
            dict.insert(t.reference, bit);
        }
    }
    out
}

/// LZ78 tokens of `x` from an empty dictionary.
pub fn lz_tokens(x: &BitString) -> Vec<Token> {
    PhraseDictionary::new().parse(x)
}

pub fn lz_cost(x: &BitString) -> u64 {
    token_cost(&lz_tokens(x), 0)
}

/// Cost of `x` after priming the dictionary with the phrases of `y`.
pub fn lz_cost_cond(x: &BitString, y: &BitString) -> u64 {
    let mut dict = PhraseDictionary::primed(y);
    let d0 = dict.len();
    token_cost(&dict.parse(x), d0)
}

/// `lz_cost(x) − lz_cost_cond(x, y)`: what `y` saves when coding `x`.
pub fn lz_info(x: &BitString, y: &BitString) -> i64 {
    lz_cost(x) as i64 - lz_cost_cond(x, y) as i64
}

/// Normalized compression distance with the concatenation `x·y`.
pub fn ncd(x: &BitString, y: &BitString) -> Result<f64, LzError> {
    if x.is_empty() && y.is_empty() {
        return Err(LzError::BothEmpty);
    }
    let cx = lz_cost(x);
    let cy = lz_cost(y);
    let cxy = lz_cost(&x.concat(y));
    Ok((cxy as f64 - cx.min(cy) as f64) / cx.max(cy) as f64)
}

/// `|I(x:y) − I(y:x)| / max(1, |I(x:y)|, |I(y:x)|)`.
pub fn normalized_asymmetry(info_xy: i64, info_yx: i64) -> f64 {
    let scale = info_xy.abs().max(info_yx.abs()).max(1);
    (info_xy - info_yx).abs() as f64 / scale as f64
}

/// Information estimates for one pair of corpus entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairInfo {
    pub x: String,
    pub y: String,
    /// `lz_info(x, y)`.
    pub info_y_to_x: i64,
    /// `lz_info(y, x)`.
    pub info_x_to_y: i64,
    pub asymmetry: f64,
    pub ncd_xy: f64,
    pub ncd_yx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrySummary {
    pub pairs: Vec<PairInfo>,
    /// Fraction of pairs with `asymmetry ≤ threshold`.
    pub within_threshold: f64,
    pub threshold: f64,
}

/// Compares every unordered pair of distinct entries.
pub fn corpus_symmetry(corpus: &[CorpusEntry], threshold: f64) -> SymmetrySummary {
    let mut pairs = Vec::new();
    for (i, a) in corpus.iter().enumerate() {
        for b in &corpus[i + 1..] {
            let info_y_to_x = lz_info(&a.bits, &b.bits);
            let info_x_to_y = lz_info(&b.bits, &a.bits);
            pairs.push(PairInfo {
                x: a.name.clone(),
                y: b.name.clone(),
                info_y_to_x,
                info_x_to_y,
                asymmetry: normalized_asymmetry(info_y_to_x, info_x_to_y),
                ncd_xy: ncd(&a.bits, &b.bits).unwrap_or(f64::NAN),
                ncd_yx: ncd(&b.bits, &a.bits).unwrap_or(f64::NAN),
            });
        }
    }
    let ok = pairs.iter().filter(|p| p.asymmetry <= threshold).count();
    let within_threshold = if pairs.is_empty() {
        1.0
    } else {
        ok as f64 / pairs.len() as f64
    };
    SymmetrySummary {
        pairs,
        within_threshold,
        threshold,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub bits: BitString,
}

fn periodic(pattern: &str, len: usize) -> BitString {
    let p = BitString::parse(pattern).expect("pattern bits");
    (0..len)
        .map(|i| p.get(i % p.len()).unwrap_or(false))
        .collect()
}

/// Binary de Bruijn sequence of order `n` (length `2^n`), by the
/// prefer-ones greedy construction.
pub fn de_bruijn(n: u32) -> BitString {
    let len = 1usize << n;
    let mask = len - 1;
    let mut seen = vec![false; len];
    let mut out = BitString::with_capacity(len);
    let mut window = 0usize;
    seen[0] = true;
    for _ in 0..n {
        out.push(false);
    }
    while out.len() < len + n as usize - 1 {
        let one = ((window << 1) | 1) & mask;
        let zero = (window << 1) & mask;
        if !seen[one] {
            seen[one] = true;
            window = one;
            out.push(true);
        } else if !seen[zero] {
            seen[zero] = true;
            window = zero;
            out.push(false);
        } else {
            break;
        }
    }
    out.truncate(len);
    out
}

fn pseudo_random(seed: u64, len: usize) -> BitString {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen::<bool>()).collect()
}

/// Deterministic corpus of periodic, de Bruijn and pseudo-random strings,
/// each between 1 KiB and 16 KiB when packed eight bits to a byte.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    const KIB: usize = 8 * 1024;
    let mut corpus = Vec::new();
    let mut add = |name: String, bits: BitString| corpus.push(CorpusEntry { name, bits });
    for (pattern, len) in [
        ("01", 2 * KIB),
        ("0011", 8 * KIB),
        ("001", 4 * KIB),
        ("01101", 16 * KIB),
    ] {
        add(format!("periodic-{pattern}-{len}"), periodic(pattern, len));
    }
    for order in [13u32, 14, 15, 17] {
        add(format!("debruijn-{order}"), de_bruijn(order));
    }
    for (seed, len) in [(1u64, KIB), (2, 4 * KIB), (3, 8 * KIB), (4, 16 * KIB)] {
        add(format!("random-{seed}-{len}"), pseudo_random(seed, len));
    }
    corpus
}

/// Reads every regular file in `dir` as a bit string of `0`/`1` lines,
/// sorted by file name. Whitespace is ignored.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<CorpusEntry>, LzError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| LzError::Io { path, source }
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io_err(dir))?;
    paths.retain(|p| p.is_file());
    paths.sort();
    if paths.is_empty() {
        return Err(LzError::EmptyCorpus(dir.to_path_buf()));
    }
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            Ok(CorpusEntry {
                name: path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                bits: parse_corpus_text(&path, &text)?,
            })
        })
        .collect()
}

fn parse_corpus_text(path: &Path, text: &str) -> Result<BitString, LzError> {
    let mut bits = BitString::new();
    for (i, line) in text.lines().enumerate() {
        for ch in line.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => {
                    return Err(LzError::CorpusFormat {
                        path: path.to_path_buf(),
                        line: i + 1,
                        ch: c,
                    })
                }
            }
        }
    }
    Ok(bits)
}

/// Pairwise `ncd(row, column)` over the corpus.
pub fn distance_matrix(corpus: &[CorpusEntry]) -> Vec<Vec<f64>> {
    corpus
        .iter()
        .map(|a| {
            corpus
                .iter()
                .map(|b| ncd(&a.bits, &b.bits).unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

/// CSV with a header row and a header column of entry names.
pub fn write_matrix_csv<W: Write>(
    corpus: &[CorpusEntry],
    matrix: &[Vec<f64>],
    mut w: W,
) -> io::Result<()> {
    write!(w, "name")?;
    for e in corpus {
        write!(w, ",{}", e.name)?;
    }
    writeln!(w)?;
    for (e, row) in corpus.iter().zip(matrix) {
        write!(w, "{}", e.name)?;
        for d in row {
            write!(w, ",{d:.6}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}
