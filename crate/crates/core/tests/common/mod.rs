//! Independent reference implementations and fixture generators shared by the
//! integration tests. Nothing here calls into the routines it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- ranks

/// Average ranks by counting, O(n^2).
pub fn naive_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&o| o < v).count() as f64;
            let equal = x.iter().filter(|&&o| o == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn naive_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx).powi(2);
        syy += (y[i] - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx.sqrt() * syy.sqrt()))
    }
}

pub fn naive_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    naive_pearson(&naive_ranks(x), &naive_ranks(y))
}

/// `n` values where roughly `tie_share` of entries repeat an earlier value.
pub fn tied_sample(r: &mut ChaCha8Rng, n: usize, tie_share: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 && r.random_bool(tie_share) {
            let j = r.random_range(0..i);
            out.push(out[j]);
        } else {
            out.push(r.random_range(-100.0..100.0));
        }
    }
    out
}

// ---------------------------------------------------------------- collapse

pub struct NaiveCollapse {
    pub global_mean: Vec<f64>,
    pub class_means: Vec<Vec<f64>>,
    pub within: Vec<Vec<f64>>,
    pub between: Vec<Vec<f64>>,
    pub class_within: Vec<Vec<Vec<f64>>>,
    pub nc1: f64,
    pub per_class_nc1: Vec<f64>,
    pub nc2: f64,
    pub per_class_nc2: Vec<f64>,
    pub nc2_nn: Vec<f64>,
}

fn outer_add(acc: &mut [Vec<f64>], v: &[f64], w: f64) {
    for i in 0..v.len() {
        for j in 0..v.len() {
            acc[i][j] += w * v[i] * v[j];
        }
    }
}

/// Moore-Penrose pseudoinverse through the SVD, singular values below
/// `rtol * sigma_max` treated as zero.
pub fn svd_pinv(m: &[Vec<f64>], rtol: f64) -> Vec<Vec<f64>> {
    let d = m.len();
    let mat = DMatrix::from_fn(d, d, |i, j| m[i][j]);
    let svd = mat.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut out = vec![vec![0.0; d]; d];
    for k in 0..d {
        let s = svd.singular_values[k];
        if smax == 0.0 || s <= rtol * smax {
            continue;
        }
        for i in 0..d {
            for j in 0..d {
                out[i][j] += vt[(k, i)] * u[(j, k)] / s;
            }
        }
    }
    out
}

fn trace_product(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut t = 0.0;
    for i in 0..a.len() {
        for k in 0..a.len() {
            t += a[i][k] * b[k][i];
        }
    }
    t
}

pub fn naive_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// NC2 terms of a set of centers: (mean over ordered pairs, per class, nearest neighbour).
pub fn naive_nc2(centers: &[Vec<f64>]) -> (f64, Vec<f64>, Vec<f64>) {
    let c = centers.len();
    let off = 1.0 / (c as f64 - 1.0);
    let mut per = vec![0.0; c];
    let mut nn = vec![0.0; c];
    let mut total = 0.0;
    for a in 0..c {
        let mut best = f64::NEG_INFINITY;
        for b in 0..c {
            if a == b {
                continue;
            }
            let cos = naive_cosine(&centers[a], &centers[b]);
            per[a] += (cos + off).abs();
            total += (cos + off).abs();
            best = best.max(cos);
        }
        per[a] /= c as f64 - 1.0;
        nn[a] = (best + off).abs();
    }
    (total / (c * (c - 1)) as f64, per, nn)
}

pub fn naive_collapse(rows: &[Vec<f64>], labels: &[u32], classes: usize, rtol: f64) -> NaiveCollapse {
    let n = rows.len();
    let d = rows[0].len();
    let mut counts = vec![0usize; classes];
    let mut class_means = vec![vec![0.0; d]; classes];
    let mut global_mean = vec![0.0; d];
    for (row, &y) in rows.iter().zip(labels) {
        counts[y as usize] += 1;
        for j in 0..d {
            class_means[y as usize][j] += row[j];
            global_mean[j] += row[j];
        }
    }
    for (mean, &n) in class_means.iter_mut().zip(&counts) {
        for v in mean.iter_mut() {
            *v /= n as f64;
        }
    }
    for v in &mut global_mean {
        *v /= n as f64;
    }

    let mut within = vec![vec![0.0; d]; d];
    let mut class_within = vec![vec![vec![0.0; d]; d]; classes];
    for (row, &y) in rows.iter().zip(labels) {
        let r: Vec<f64> = (0..d).map(|j| row[j] - class_means[y as usize][j]).collect();
        outer_add(&mut within, &r, 1.0 / n as f64);
        outer_add(&mut class_within[y as usize], &r, 1.0 / counts[y as usize] as f64);
    }
    let mut between = vec![vec![0.0; d]; d];
    for mean in &class_means {
        let r: Vec<f64> = (0..d).map(|j| mean[j] - global_mean[j]).collect();
        outer_add(&mut between, &r, 1.0 / classes as f64);
    }

    let pinv = svd_pinv(&between, rtol);
    let nc1 = trace_product(&within, &pinv) / classes as f64;
    let per_class_nc1 = class_within.iter().map(|w| trace_product(w, &pinv) / classes as f64).collect();
    let (nc2, per_class_nc2, nc2_nn) = naive_nc2(&class_means);

    NaiveCollapse {
        global_mean,
        class_means,
        within,
        between,
        class_within,
        nc1,
        per_class_nc1,
        nc2,
        per_class_nc2,
        nc2_nn,
    }
}

/// `|a - b| <= tol * scale`, with `scale = max(|a|, |b|)` or 1e-300 when both are 0.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1e-300);
    (a - b).abs() <= tol * scale
}

/// Largest entrywise deviation relative to the largest reference entry.
pub fn matrix_rel_err(a: &DMatrix<f64>, b: &[Vec<f64>]) -> f64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut worst = 0.0f64;
    for (i, row) in b.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((a[(i, j)] - v).abs() / scale);
        }
    }
    worst
}

/// Unit vectors `e_i - 1/C` in `C` dimensions: a simplex equiangular tight frame.
pub fn simplex_etf(c: usize) -> Vec<Vec<f64>> {
    (0..c)
        .map(|i| {
            let v: Vec<f64> = (0..c).map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / c as f64).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        })
        .collect()
}

// ---------------------------------------------------------------- sampler

/// Exact inclusion probability of every class under sequential draws without
/// replacement, each proportional to weight among the classes not yet drawn,
/// by walking the whole draw tree.
pub fn exact_inclusion(weights: &[f64], draws: usize) -> Vec<f64> {
    fn walk(weights: &[f64], taken: &mut Vec<bool>, left: usize, p: f64, acc: &mut [f64]) {
        if left == 0 {
            return;
        }
        let total: f64 = weights.iter().zip(taken.iter()).filter(|(_, &t)| !t).map(|(w, _)| w).sum();
        for i in 0..weights.len() {
            if taken[i] || weights[i] == 0.0 {
                continue;
            }
            let q = p * weights[i] / total;
            acc[i] += q;
            taken[i] = true;
            walk(weights, taken, left - 1, q, acc);
            taken[i] = false;
        }
    }
    let mut acc = vec![0.0; weights.len()];
    walk(weights, &mut vec![false; weights.len()], draws, 1.0, &mut acc);
    acc
}

/// Whether `hits` out of `n` is inside the two-sided 99% binomial interval
/// around `p` (normal approximation with continuity correction).
pub fn within_binomial_99(hits: usize, n: usize, p: f64) -> bool {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (hits as f64 - mean).abs() <= 2.5758 * sd + 0.5
}

// ---------------------------------------------------------------- captions

pub struct Concept {
    pub class_id: u32,
    pub names: Vec<&'static str>,
    pub negatives: Vec<&'static str>,
}

/// Twenty concepts with multi-word synonyms, shared tokens and negative words.
pub fn fixture_concepts() -> Vec<Concept> {
    let c = |class_id, names: &[&'static str], negatives: &[&'static str]| Concept {
        class_id,
        names: names.to_vec(),
        negatives: negatives.to_vec(),
    };
    vec![
        c(0, &["dog", "puppy"], &[]),
        c(1, &["cat", "kitten"], &[]),
        c(2, &["ram"], &["vehicle", "truck"]),
        c(3, &["crane"], &["bird"]),
        c(4, &["whooping crane", "crane bird"], &[]),
        c(5, &["golden retriever"], &[]),
        c(6, &["fire truck", "fire engine"], &[]),
        c(7, &["t-shirt", "tee"], &[]),
        c(8, &["teddy bear", "teddy"], &[]),
        c(9, &["bear"], &["teddy"]),
        c(10, &["box", "crate"], &[]),
        c(11, &["butterfly"], &[]),
        c(12, &["church"], &[]),
        c(13, &["goose"], &[]),
        c(14, &["mouse"], &["computer"]),
        c(15, &["apple"], &["iphone"]),
        c(16, &["sea lion"], &[]),
        c(17, &["lion"], &[]),
        c(18, &["bus"], &[]),
        c(19, &["wine glass", "glass"], &[]),
    ]
}

pub fn concepts_json(concepts: &[Concept]) -> String {
    let items: Vec<serde_json::Value> = concepts
        .iter()
        .map(|c| serde_json::json!({"class_id": c.class_id, "names": c.names, "negatives": c.negatives}))
        .collect();
    serde_json::to_string_pretty(&items).unwrap()
}

pub const FIXTURE_LEMMAS: &str = "geese\tgoose\nmice\tmouse\nbus\tbus\nbuses\tbus\n";

/// Lemma of a phrase as a token list (hand-written, not via the normalizer).
fn phrase_lemmas(phrase: &'static str) -> Vec<&'static str> {
    match phrase {
        "whooping crane" => vec!["whooping", "crane"],
        "crane bird" => vec!["crane", "bird"],
        "golden retriever" => vec!["golden", "retriever"],
        "fire truck" => vec!["fire", "truck"],
        "fire engine" => vec!["fire", "engine"],
        "t-shirt" => vec!["t", "shirt"],
        "teddy bear" => vec!["teddy", "bear"],
        "sea lion" => vec!["sea", "lion"],
        "wine glass" => vec!["wine", "glass"],
        single => vec![single],
    }
}

/// Surface spellings of a lemma whose normalization is that lemma under
/// [`FIXTURE_LEMMAS`] and the plural rules.
fn surfaces(lemma: &str) -> Vec<&'static str> {
    match lemma {
        "dog" => vec!["dog", "dogs", "Dog", "DOGS"],
        "puppy" => vec!["puppy", "puppies", "Puppies"],
        "cat" => vec!["cat", "cats", "CAT"],
        "kitten" => vec!["kitten", "kittens"],
        "ram" => vec!["ram", "rams", "Ram"],
        "truck" => vec!["truck", "trucks"],
        "vehicle" => vec!["vehicle", "vehicles"],
        "crane" => vec!["crane", "cranes"],
        "bird" => vec!["bird", "birds"],
        "whooping" => vec!["whooping"],
        "golden" => vec!["golden", "Golden"],
        "retriever" => vec!["retriever", "retrievers"],
        "fire" => vec!["fire", "fires"],
        "engine" => vec!["engine", "engines"],
        "t" => vec!["t", "T"],
        "shirt" => vec!["shirt", "shirts"],
        "tee" => vec!["tee", "tees"],
        "teddy" => vec!["teddy", "teddies"],
        "bear" => vec!["bear", "bears"],
        "box" => vec!["box", "boxes"],
        "crate" => vec!["crate", "crates"],
        "butterfly" => vec!["butterfly", "butterflies"],
        "church" => vec!["church", "churches"],
        "goose" => vec!["goose", "geese", "Geese"],
        "mouse" => vec!["mouse", "mice"],
        "computer" => vec!["computer", "computers"],
        "apple" => vec!["apple", "apples"],
        "iphone" => vec!["iphone", "iPhone"],
        "sea" => vec!["sea", "seas"],
        "lion" => vec!["lion", "lions"],
        "bus" => vec!["bus", "buses", "Bus"],
        "wine" => vec!["wine", "wines"],
        "glass" => vec!["glass", "glasses"],
        other => panic!("no surface forms for {other}"),
    }
}

/// Filler words that normalize to themselves and belong to no concept.
const FILLER: &[&str] = &[
    "a",
    "the",
    "photo",
    "of",
    "on",
    "in",
    "with",
    "and",
    "near",
    "my",
    "sunny",
    "day",
    "beautiful",
    "picture",
    "at",
    "old",
    "red",
    "small",
    "big",
    "image",
    "outdoor",
    "garden",
    "2019",
    "x1500",
];

/// Words from concept phrases or negatives planted alone as traps.
const DECOYS: &[&str] = &[
    "golden", "fire", "sea", "wine", "whooping", "t", "truck", "vehicle", "bird", "teddy", "computer",
    "iphone", "engine", "shirt",
];

/// Context words of the fixed trap captions.
const TRAP_CONTEXT: &[&str] =
    &["dodge", "1500", "grazing", "so", "cute", "marsh", "construction", "dusk", "bed"];

const SEPARATORS: &[&str] = &[" ", " ", " ", ", ", "-", "! ", " / ", "_", "...", " (", ") "];

pub struct CaptionFixture {
    pub concepts: Vec<Concept>,
    pub lines: Vec<String>,
    /// Expected count per class id, by set matching on the planted lemmas.
    pub expected: BTreeMap<u32, u64>,
}

/// Class ids matched by a caption given its lemma set: some phrase fully
/// contained and no negative present.
pub fn oracle_match(concepts: &[Concept], lemmas: &BTreeSet<&str>) -> BTreeSet<u32> {
    concepts
        .iter()
        .filter(|c| {
            let positive = c.names.iter().any(|p| phrase_lemmas(p).iter().all(|t| lemmas.contains(t)));
            let vetoed = c.negatives.iter().any(|n| lemmas.contains(n));
            positive && !vetoed
        })
        .map(|c| c.class_id)
        .collect()
}

/// Planted captions with the fixed ram/truck and crane/bird traps first, then
/// random plants, decoys and fillers in shuffled order with mixed separators.
pub fn caption_fixture(records: usize, seed: u64) -> CaptionFixture {
    use rand::seq::SliceRandom;

    let concepts = fixture_concepts();
    let mut r = rng(seed);
    let mut fixed: Vec<Vec<&'static str>> = vec![
        vec!["dodge", "ram", "truck", "1500"],
        vec!["a", "ram", "grazing"],
        vec!["retriever", "so", "golden", "and", "cute"],
        vec!["crane", "bird", "in", "a", "marsh"],
        vec!["construction", "crane", "at", "dusk"],
        vec!["teddy", "bear", "on", "a", "bed"],
        vec!["apple", "iphone", "box"],
    ];
    let mut lines = Vec::with_capacity(records);
    let mut expected: BTreeMap<u32, u64> = concepts.iter().map(|c| (c.class_id, 0)).collect();

    for i in 0..records {
        let words: Vec<&'static str> = if !fixed.is_empty() {
            fixed.remove(0)
        } else {
            let mut w = Vec::new();
            for _ in 0..r.random_range(0..=3) {
                let concept = &concepts[r.random_range(0..concepts.len())];
                let phrase = concept.names[r.random_range(0..concept.names.len())];
                w.extend(phrase_lemmas(phrase));
            }
            for _ in 0..r.random_range(0..=2) {
                w.push(DECOYS[r.random_range(0..DECOYS.len())]);
            }
            for _ in 0..r.random_range(1..=5) {
                w.push(FILLER[r.random_range(0..FILLER.len())]);
            }
            w.shuffle(&mut r);
            w
        };

        let lemma_set: BTreeSet<&str> = words.iter().copied().collect();
        for class in oracle_match(&concepts, &lemma_set) {
            *expected.get_mut(&class).unwrap() += 1;
        }

        let mut text = String::new();
        for (k, word) in words.iter().enumerate() {
            if k > 0 {
                text.push_str(SEPARATORS[r.random_range(0..SEPARATORS.len())]);
            }
            let forms = if FILLER.contains(word) || TRAP_CONTEXT.contains(word) {
                vec![*word]
            } else {
                surfaces(word)
            };
            text.push_str(forms[r.random_range(0..forms.len())]);
        }
        let line = serde_json::json!({"id": format!("cap{i:04}"), "text": text}).to_string();
        lines.push(line);
    }
    CaptionFixture { concepts, lines, expected }
}

// ---------------------------------------------------------------- throughput corpus

/// A vocabulary of `classes` single- and two-token concepts over synthetic words.
pub fn synthetic_vocabulary_json(classes: usize) -> String {
    let items: Vec<serde_json::Value> = (0..classes)
        .map(|c| {
            let names = if c % 3 == 0 {
                vec![format!("zq{c}a zq{c}b"), format!("zq{c}")]
            } else {
                vec![format!("zq{c}")]
            };
            let negatives: Vec<String> = if c % 7 == 0 { vec![format!("no{c}")] } else { vec![] };
            serde_json::json!({"class_id": c, "names": names, "negatives": negatives})
        })
        .collect();
    serde_json::to_string(&items).unwrap()
}

/// Newline-delimited caption corpus of `records` lines, about 12 words each.
pub fn synthetic_corpus(records: usize, classes: usize, seed: u64) -> Vec<u8> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(records * 110);
    let fillers = ["a", "photo", "of", "the", "with", "near", "outdoor", "sunny", "day", "old"];
    for i in 0..records {
        let mut text = String::with_capacity(96);
        for k in 0..12 {
            if k > 0 {
                text.push(' ');
            }
            if r.random_bool(0.2) {
                let c = r.random_range(0..classes);
                text.push_str(&format!("ZQ{c}{}", if r.random_bool(0.5) { "a" } else { "" }));
            } else {
                text.push_str(fillers[r.random_range(0..fillers.len())]);
            }
        }
        out.extend_from_slice(format!("{{\"id\":\"r{i}\",\"text\":\"{text}\"}}\n").as_bytes());
    }
    out
}
