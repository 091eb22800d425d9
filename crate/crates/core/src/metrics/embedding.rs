use std::hash::Hasher;

use fnv::FnvHasher;

/// Maps a predicate name to a fixed-length vector.
pub trait Embedder: Sync {
    fn embed(&self, name: &str) -> Vec<f64>;
}

/// Hashed bag of character trigrams, L2-normalized.
///
/// The name is split at underscores and lower-to-upper case changes,
/// lowercased and joined with single spaces, then wrapped as `^name$`. Each
/// trigram is hashed with 64-bit FNV-1a into one of `dim` buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrigramEmbedder {
    pub dim: usize,
}

impl Default for TrigramEmbedder {
    fn default() -> Self {
        TrigramEmbedder { dim: 512 }
    }
}

/// `HasCert` and `has_cert` both become `has cert`.
pub fn split_name(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut words: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c.is_whitespace() {
            if !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            continue;
        }
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1);
        let boundary = c.is_uppercase()
            && !cur.is_empty()
            && (prev.is_some_and(|p| p.is_lowercase() || p.is_ascii_digit())
                || (prev.is_some_and(char::is_uppercase) && next.is_some_and(|n| n.is_lowercase())));
        if boundary {
            words.push(std::mem::take(&mut cur));
        }
        cur.extend(c.to_lowercase());
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words.join(" ")
}

pub fn trigrams(name: &str) -> Vec<String> {
    let padded: Vec<char> = format!("^{}$", split_name(name)).chars().collect();
    padded.windows(3).map(|w| w.iter().collect()).collect()
}

fn bucket(gram: &str, dim: usize) -> usize {
    let mut h = FnvHasher::default();
    h.write(gram.as_bytes());
    (h.finish() % dim as u64) as usize
}

impl Embedder for TrigramEmbedder {
    fn embed(&self, name: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for g in trigrams(name) {
            v[bucket(&g, self.dim)] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

/// Cosine of two vectors; 0 when either is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
