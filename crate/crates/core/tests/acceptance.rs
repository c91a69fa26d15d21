//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Tolerances are pinned below.

mod common;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use gec_eval::config::RunConfig;
use gec_eval::corpus::{parse_multiged_str, LabelScheme, SentenceRecord};
use gec_eval::gateway::{write_corrections, Correction};
use gec_eval::grammar::correctness;
use gec_eval::metrics::{
    drift_score, edit_distance_chars, gleu_score, gleu_tokens, length_diff_score, levenshtein_score, macro_average,
    preservation_f1, word_tokenize, LanguageProbabilities, Metric, MetricVector,
};
use gec_eval::pipeline;
use gec_eval::prompts::PromptId;
use gec_eval::ranking::{metric_ranks, rank_all, spearman, two_step_global_rank, Aggregate, Precision};
use gec_eval::report::{default_rules, pattern_counts, prompt_selection_table, read_metric_table};
use gec_eval::Language;

const TABLE1_TOKEN_MEAN_TOL: f64 = 0.01;
const TABLE1_STDDEV_TOL: f64 = 0.02;
const TABLE1_MAX_RUNTIME: Duration = Duration::from_secs(10);
const MACRO_TOL: f64 = 0.0005;
/// Binary representation slack for the macro comparison only; 0.9485 is
/// stored slightly above its decimal value.
const FLOAT_SLACK: f64 = 1e-9;
const SPEARMAN_MIN: f64 = 0.95;
const P3_WINS_EXPECTED: usize = 32;
const PROMPT_SCENARIOS: usize = 36;
const GLEU_PAIRS: usize = 1000;
const FUZZ_PAIRS: usize = 10_000;
const YI_EN_GRAMMATICALLY_CORRECT: usize = 327;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn table(name: &str) -> BTreeMap<String, MetricVector> {
    read_metric_table(File::open(common::data(name)).unwrap()).unwrap()
}

fn per_language_tables() -> BTreeMap<Language, BTreeMap<String, MetricVector>> {
    BTreeMap::from([
        (Language::En, table("table8_en.csv")),
        (Language::De, table("table9_de.csv")),
        (Language::It, table("table10_it.csv")),
        (Language::Sv, table("table11_sv.csv")),
    ])
}

// ---------------------------------------------------------------- Table 1

fn find_file(dir: &Path, name: &str) -> Option<PathBuf> {
    for entry in std::fs::read_dir(dir).ok()? {
        let p = entry.ok()?.path();
        if p.is_dir() {
            if let Some(f) = find_file(&p, name) {
                return Some(f);
            }
        } else if p.file_name().is_some_and(|n| n == name) {
            return Some(p);
        }
    }
    None
}

fn table1() -> Outcome {
    let Some(root) = std::env::var_os("MULTIGED_DIR").map(PathBuf::from) else {
        return outcome(false, "MultiGED dev data not available (set MULTIGED_DIR)");
    };
    let names = [
        (Language::En, "en_fce_dev.tsv"),
        (Language::De, "de_falko-merlin_dev.tsv"),
        (Language::It, "it_merlin_dev.tsv"),
        (Language::Sv, "sv_swell_dev.tsv"),
    ];
    let mut cfg = RunConfig::default();
    for (lang, name) in names {
        match find_file(&root, name) {
            Some(p) => {
                cfg.corpus.files.insert(lang, p);
            }
            None => return outcome(false, format!("{name} not found under {}", root.display())),
        }
    }
    let out = tempfile::tempdir().unwrap();
    cfg.out_dir = out.path().to_path_buf();
    let start = Instant::now();
    let summary = match pipeline::run_summarize(&cfg) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = start.elapsed();

    let expected = [
        (Language::En, 2191, 906, 15.9),
        (Language::De, 2503, 619, 15.81),
        (Language::It, 758, 268, 11.98),
        (Language::Sv, 911, 199, 17.25),
    ];
    let mut problems = Vec::new();
    for (lang, total, correct, mean) in expected {
        let row = summary.row(lang).unwrap();
        if row.total_sentences != total || row.correct_sentences != correct {
            problems.push(format!(
                "{lang}: {}/{} vs {total}/{correct}",
                row.total_sentences, row.correct_sentences
            ));
        }
        if (row.mean_tokens - mean).abs() > TABLE1_TOKEN_MEAN_TOL {
            problems.push(format!("{lang} mean {:.3} vs {mean}", row.mean_tokens));
        }
    }
    let t = &summary.total;
    if t.total_sentences != 6363 || t.correct_sentences != 1992 {
        problems.push(format!("total {}/{} vs 6363/1992", t.total_sentences, t.correct_sentences));
    }
    if (t.mean_tokens - 15.59).abs() > TABLE1_TOKEN_MEAN_TOL {
        problems.push(format!("pooled mean {:.3} vs 15.59", t.mean_tokens));
    }
    if (t.stddev_tokens - 10.21).abs() > TABLE1_STDDEV_TOL {
        problems.push(format!("pooled stddev {:.3} vs 10.21 ({:?})", t.stddev_tokens, summary.stddev));
    }
    if elapsed > TABLE1_MAX_RUNTIME {
        problems.push(format!("runtime {elapsed:?}"));
    }
    if problems.is_empty() {
        outcome(true, format!("all counts and means match, {elapsed:.2?}"))
    } else {
        outcome(false, problems.join("; "))
    }
}

// ---------------------------------------------------------------- macro

fn macro_reproduction() -> Outcome {
    let per_language = per_language_tables();
    let published = table("table3_macro.csv");
    let mut misses = Vec::new();
    let mut checked = 0;
    for (model, want) in &published {
        let by_lang: BTreeMap<Language, MetricVector> =
            per_language.iter().map(|(l, t)| (*l, t[model])).collect();
        let got = macro_average(&by_lang).unwrap();
        for metric in Metric::ALL {
            let (g, w) = (got.get(metric).unwrap(), want.get(metric).unwrap());
            checked += 1;
            if (g - w).abs() > MACRO_TOL + FLOAT_SLACK {
                misses.push(format!("{model} {metric}: {g:.5} vs {w:.3}"));
            }
        }
    }
    let gemma = macro_average(&per_language.iter().map(|(l, t)| (*l, t["Gemma (9B)"])).collect()).unwrap();
    let example = gemma.get(Metric::Lt).unwrap();
    let example_ok = (example - 0.9485).abs() < 1e-12;
    let detail = format!(
        "{}/{checked} cells within ±{MACRO_TOL}; Gemma 9B LT = {example:.4}{}",
        checked - misses.len(),
        if misses.is_empty() {
            String::new()
        } else {
            format!("; off: {}", misses.join(", "))
        }
    );
    outcome(misses.is_empty() && example_ok, detail)
}

// ---------------------------------------------------------------- Table 5

fn rank_reproduction() -> Outcome {
    let values = table("table3_macro.csv");
    let published = table("table5_ranks.csv");
    let ours = metric_ranks(&values, &Metric::ALL, Precision::Rounded).unwrap();
    let mut mismatches = Vec::new();
    let mut cells = 0;
    for metric in Metric::ALL {
        for (model, v) in &values {
            let x = v.get(metric).unwrap();
            // the published table breaks exact ties by row order; a tie group
            // is compared against its smallest published rank
            let expected = values
                .iter()
                .filter(|(_, o)| o.get(metric) == Some(x))
                .map(|(m, _)| published[m].get(metric).unwrap() as usize)
                .min()
                .unwrap();
            let got = ours[&metric].ranks[model];
            cells += 1;
            if got != expected {
                mismatches.push(format!("{model} {metric}: {got} vs {expected}"));
            }
        }
    }
    let spot = [
        ("Gemma (9B)", Metric::Lt, 1),
        ("Qwen 2.5", Metric::Bleurt, 1),
        ("Qwen 2.5", Metric::Levenshtein, 1),
        ("Qwen 2.5", Metric::Gleu, 1),
        ("BLOOM", Metric::Sbert, 17),
    ];
    for (model, metric, rank) in spot {
        if ours[&metric].ranks[model] != rank {
            mismatches.push(format!("spot check {model} {metric} != {rank}"));
        }
    }
    let detail = if mismatches.is_empty() {
        format!("{cells}/{cells} cells and 5 spot checks match")
    } else {
        mismatches.join("; ")
    };
    outcome(mismatches.is_empty(), detail)
}

// ---------------------------------------------------------------- Table 4

fn global_ranking() -> Outcome {
    let per_language = per_language_tables();
    let published = std::fs::read_to_string(common::data("table4_global_ranks.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(published.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mut columns: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        for (i, h) in header.iter().enumerate().skip(1) {
            columns.entry(h.clone()).or_default().insert(rec[0].to_string(), rec[i].parse().unwrap());
        }
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (lang, vectors) in &per_language {
        let r = two_step_global_rank(lang.code(), vectors, Precision::Rounded).unwrap();
        let ours: BTreeMap<String, f64> = r.global.ranks.iter().map(|(m, &k)| (m.clone(), k as f64)).collect();
        let rho = spearman(&ours, &columns[lang.code()]).unwrap();
        pass &= rho >= SPEARMAN_MIN;
        parts.push(format!("{lang} ρ={rho:.3}"));
    }
    let set = rank_all(&per_language, Aggregate::Macro, Precision::Rounded).unwrap();
    let top: Vec<(&str, usize)> = set.overall.global.ordered().into_iter().take(3).collect();
    let want = [("Gemma (9B)", 1), ("Qwen 2.5", 2), ("Aya", 3)];
    let top_ok = want.iter().all(|(m, r)| set.overall.global.ranks.get(*m) == Some(r))
        && top.iter().filter(|(_, r)| *r <= 3).count() == 3;
    pass &= top_ok;
    parts.push(format!(
        "aggregated top-3 {}",
        top.iter().map(|(m, r)| format!("#{r} {m}")).collect::<Vec<_>>().join(", ")
    ));
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------- Table 2

fn prompt_table(name: &str) -> BTreeMap<(PromptId, Language), MetricVector> {
    let text = std::fs::read_to_string(common::data(name)).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let mut v = MetricVector::default();
        for (i, h) in header.iter().enumerate().skip(2) {
            v.set(h.parse().unwrap(), Some(rec[i].parse().unwrap()));
        }
        out.insert((rec[0].parse().unwrap(), rec[1].parse().unwrap()), v);
    }
    out
}

fn prompt_selection() -> Outcome {
    let sel = prompt_selection_table(&prompt_table("table2_prompt_selection.csv"), Precision::Rounded).unwrap();
    let supported =
        prompt_selection_table(&prompt_table("table7_prompt_selection_supported.csv"), Precision::Rounded).unwrap();
    let p3 = sel.wins[&PromptId::P3];
    let pass = p3 == P3_WINS_EXPECTED && sel.scenarios == PROMPT_SCENARIOS;
    outcome(
        pass,
        format!(
            "Table 2: P3 best in {p3}/{} (expected {P3_WINS_EXPECTED}); supported-model table: P3 {}/{}",
            sel.scenarios, supported.wins[&PromptId::P3], supported.scenarios
        ),
    )
}

// ---------------------------------------------------------------- oracles

/// Edit distances from `a` to every string over {a,b,c} up to length 8,
/// walking the prefix trie one DP row per node.
fn trie_oracle(a: &[char], alphabet: &[char], max_len: usize, kernel_mismatches: &mut usize) {
    fn walk(
        a: &[char],
        alphabet: &[char],
        max_len: usize,
        b: &mut Vec<char>,
        row: &[usize],
        mismatches: &mut usize,
    ) {
        if edit_distance_chars(a, b) != row[a.len()] {
            *mismatches += 1;
        }
        if b.len() == max_len {
            return;
        }
        for &c in alphabet {
            let mut next = vec![b.len() + 1; a.len() + 1];
            for i in 1..=a.len() {
                let sub = row[i - 1] + usize::from(a[i - 1] != c);
                next[i] = sub.min(row[i] + 1).min(next[i - 1] + 1);
            }
            b.push(c);
            walk(a, alphabet, max_len, b, &next, mismatches);
            b.pop();
        }
    }
    let first: Vec<usize> = (0..=a.len()).collect();
    walk(a, alphabet, max_len, &mut Vec::new(), &first, kernel_mismatches);
}

fn all_strings(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                let mut t: Vec<char> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn levenshtein_oracle() -> (usize, usize) {
    let alphabet = ['a', 'b', 'c'];
    let strings = all_strings(&alphabet, 8);
    let mismatches: usize = strings
        .par_iter()
        .map(|a| {
            let mut m = 0;
            trie_oracle(a, &alphabet, 8, &mut m);
            m
        })
        .sum();
    (strings.len() * strings.len(), mismatches)
}

fn gleu_brute(reference: &[&str], hypothesis: &[&str]) -> f64 {
    let grams = |t: &[&str]| -> Vec<Vec<String>> {
        let mut g = Vec::new();
        for n in 1..=4 {
            if t.len() >= n {
                for i in 0..=t.len() - n {
                    g.push(t[i..i + n].iter().map(|s| s.to_string()).collect());
                }
            }
        }
        g
    };
    let hyp = grams(hypothesis);
    let refs = grams(reference);
    let mut used = vec![false; refs.len()];
    let mut matched = 0usize;
    for h in &hyp {
        if let Some(j) = (0..refs.len()).find(|&j| !used[j] && &refs[j] == h) {
            used[j] = true;
            matched += 1;
        }
    }
    let denom = hyp.len().max(refs.len());
    if denom == 0 {
        0.0
    } else {
        matched as f64 / denom as f64
    }
}

fn gleu_oracle(rng: &mut StdRng) -> usize {
    let vocab = ["the", "cat", "sat", "on", "mat", "a"];
    let mut mismatches = 0;
    for _ in 0..GLEU_PAIRS {
        let seq = |rng: &mut StdRng| -> Vec<&str> {
            let n = rng.random_range(0..=10);
            (0..n).map(|_| vocab[rng.random_range(0..vocab.len())]).collect()
        };
        let r = seq(rng);
        let h = seq(rng);
        if gleu_tokens(&r, &h) != gleu_brute(&r, &h) {
            mismatches += 1;
        }
    }
    mismatches
}

fn f1_oracle() -> (usize, usize) {
    let fixture = "A\tc\n\nB\tc\n\nC\tc\n\nD\tc\n";
    let base = parse_multiged_str(fixture, Language::En, &LabelScheme::default()).unwrap();
    let mut cases = 0;
    let mut mismatches = 0;
    for gold in 0u32..16 {
        for copied in 0u32..16 {
            cases += 1;
            let records: Vec<SentenceRecord> = base
                .iter()
                .enumerate()
                .map(|(i, r)| SentenceRecord {
                    is_correct: gold >> i & 1 == 1,
                    ..r.clone()
                })
                .collect();
            let corrections: Vec<Correction> = records
                .iter()
                .enumerate()
                .map(|(i, r)| Correction {
                    sentence_id: r.id.clone(),
                    model_id: "m".into(),
                    prompt_id: PromptId::P3,
                    language: Language::En,
                    output_text: if copied >> i & 1 == 1 { r.text.clone() } else { format!("{} x", r.text) },
                    raw_response: None,
                    timestamp: None,
                })
                .collect();
            let got = preservation_f1(corrections.iter().zip(&records)).f1;

            let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
            for i in 0..4 {
                match (copied >> i & 1 == 1, gold >> i & 1 == 1) {
                    (true, true) => tp += 1.0,
                    (true, false) => fp += 1.0,
                    (false, true) => fn_ += 1.0,
                    _ => {}
                }
            }
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            let want = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            if (got - want).abs() > 1e-12 {
                mismatches += 1;
            }
        }
    }
    (cases, mismatches)
}

fn oracle_suites() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x9e3779b9);
    let (lev_pairs, lev_bad) = levenshtein_oracle();
    let gleu_bad = gleu_oracle(&mut rng);
    let (f1_cases, f1_bad) = f1_oracle();
    outcome(
        lev_bad == 0 && gleu_bad == 0 && f1_bad == 0,
        format!(
            "levenshtein {lev_bad} mismatches / {lev_pairs} pairs; gleu {gleu_bad} / {GLEU_PAIRS}; f1 {f1_bad} / {f1_cases}"
        ),
    )
}

// ---------------------------------------------------------------- invariants

fn random_sentence(rng: &mut StdRng) -> String {
    const WORDS: [&str; 24] = [
        "the", "cat", "Straße", "ist", "schön", "perché", "città", "och", "får", "don't", "it's", "3,5", "e-mail",
        "U.S.", "\"", "(", ")", ",", ".", "?", "!", "😀", "naïve", "Ärger",
    ];
    let n = rng.random_range(0..20);
    let words: Vec<&str> = (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
    let mut s = String::new();
    for w in words {
        if !s.is_empty() && rng.random_bool(0.8) {
            s.push(' ');
        }
        s.push_str(w);
    }
    s
}

fn mutate(rng: &mut StdRng, s: &str) -> String {
    match rng.random_range(0..4) {
        0 => s.to_string(),
        1 => random_sentence(rng),
        2 => format!("{s} {}", random_sentence(rng)),
        _ => {
            let mut chars: Vec<char> = s.chars().collect();
            if !chars.is_empty() {
                let i = rng.random_range(0..chars.len());
                chars.remove(i);
            }
            chars.into_iter().collect()
        }
    }
}

fn formula_invariants() -> Outcome {
    let mut problems = Vec::new();
    for n in 0..=100usize {
        if correctness(n) != 1.0 / (1.0 + n as f64) {
            problems.push(format!("correctness({n})"));
        }
    }
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..FUZZ_PAIRS {
        let src = random_sentence(&mut rng);
        let out = mutate(&mut rng, &src);
        let lang = Language::ALL[rng.random_range(0..4)];

        let probs = LanguageProbabilities {
            text: src.clone(),
            probability_of: Language::ALL.iter().map(|&l| (l, rng.random::<f64>())).collect(),
        };
        let other = LanguageProbabilities {
            text: out.clone(),
            probability_of: Language::ALL.iter().map(|&l| (l, rng.random::<f64>())).collect(),
        };
        if drift_score(&probs, &probs, lang).unwrap() != 0.0 {
            problems.push(format!("drift(x,x) != 0 for {src:?}"));
        }

        let d = length_diff_score(&src, &out, lang);
        let equal_counts = word_tokenize(&src).len() == word_tokenize(&out).len();
        if (d == 1.0) != equal_counts {
            problems.push(format!("length diff {d} for {src:?} / {out:?}"));
        }

        let mut v = MetricVector::default();
        v.set(Metric::Lt, Some(correctness(rng.random_range(0..50))));
        v.set(Metric::Levenshtein, Some(levenshtein_score(&src, &out)));
        v.set(Metric::LengthDiff, Some(d));
        v.set(Metric::Gleu, Some(gleu_score(&src, &out, lang)));
        v.set(Metric::Drift, Some(drift_score(&probs, &other, lang).unwrap()));
        let bad = v.out_of_bounds();
        if !bad.is_empty() || v.get(Metric::Levenshtein) == Some(0.0) {
            problems.push(format!("{bad:?} out of bounds for {src:?} / {out:?}"));
        }
        if src == out && (levenshtein_score(&src, &out) != 1.0 || d != 1.0) {
            problems.push(format!("identity scores for {src:?}"));
        }
    }
    let detail = if problems.is_empty() {
        format!("correctness n=0..100 exact; {FUZZ_PAIRS} fuzzed pairs within bounds")
    } else {
        format!("{} violations, first: {}", problems.len(), problems[0])
    };
    outcome(problems.is_empty(), detail)
}

// ---------------------------------------------------------------- determinism

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn replay_fixture(dir: &Path) -> (RunConfig, PathBuf) {
    let cfg_path = common::write_fixture(dir, "[[models]]\nid = \"fixer\"\n\n[[models]]\nid = \"copier\"\n");
    let cfg = RunConfig::load(&cfg_path).unwrap();
    let corpus = pipeline::load_corpus(&cfg).unwrap();
    let mut corrections = Vec::new();
    for model in ["copier", "fixer"] {
        for prompt in PromptId::ALL {
            for sentences in corpus.values() {
                for s in sentences {
                    let output_text = if model == "fixer" { s.text.replace("teh", "the") } else { s.text.clone() };
                    corrections.push(Correction {
                        sentence_id: s.id.clone(),
                        model_id: model.into(),
                        prompt_id: prompt,
                        language: s.language,
                        output_text,
                        raw_response: None,
                        timestamp: None,
                    });
                }
            }
        }
    }
    let replay = dir.join("replay.jsonl");
    write_corrections(File::create(&replay).unwrap(), &corrections).unwrap();
    (cfg, replay)
}

fn full_run(cfg: &RunConfig, replay: &Path, out: PathBuf) -> BTreeMap<PathBuf, Vec<u8>> {
    let cfg = RunConfig {
        out_dir: out.clone(),
        ..cfg.clone()
    };
    pipeline::run_score(&cfg, Some(replay)).unwrap();
    pipeline::run_rank(&cfg).unwrap();
    pipeline::run_report(&cfg, Some(replay)).unwrap();
    tree(&out)
}

fn determinism() -> Outcome {
    let checker = common::mock_checker();
    let scorer = common::mock_scorer();
    let dir = tempfile::tempdir().unwrap();
    let (mut cfg, replay) = replay_fixture(dir.path());
    cfg.checker.url = Some(checker.url.clone());

    let mut parts = Vec::new();
    let mut pass = true;
    for (label, scorer_url) in [("with scorer", Some(scorer.url.clone())), ("scorer absent", None)] {
        cfg.scorer.url = scorer_url;
        let a = full_run(&cfg, &replay, dir.path().join(format!("{label}-a")));
        let b = full_run(&cfg, &replay, dir.path().join(format!("{label}-b")));
        let same = a == b && !a.is_empty();
        pass &= same;
        parts.push(format!(
            "{label}: {} files {}",
            a.len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------- patterns

fn pattern_counts_criterion() -> Outcome {
    let rules = default_rules();
    // synthetic outputs for one rule must not match any other rule with the
    // same filters
    for (i, r) in rules.iter().enumerate() {
        for (j, s) in rules.iter().enumerate() {
            if i != j && r.model == s.model && r.language == s.language {
                assert!(!s.pattern.to_lowercase().contains(&r.pattern.to_lowercase()));
            }
        }
    }
    let mut corrections = Vec::new();
    let mut expected = Vec::new();
    let mut n = 0;
    for (i, rule) in rules.iter().enumerate() {
        let k = 1 + (i * 7) % 11;
        expected.push(k);
        let language: Language = rule.language.parse().unwrap();
        for j in 0..k {
            let output_text = match rule.match_mode {
                gec_eval::report::MatchMode::Prefix => format!("  {} and then {j}", rule.pattern),
                gec_eval::report::MatchMode::Substring => {
                    format!("Sentence {j}: {} end.", rule.pattern.to_uppercase())
                }
            };
            let mut push = |model: &str, text: String| {
                n += 1;
                corrections.push(Correction {
                    sentence_id: format!("{}-{n}", language.code()),
                    model_id: model.to_string(),
                    prompt_id: PromptId::P3,
                    language,
                    output_text: text,
                    raw_response: None,
                    timestamp: None,
                });
            };
            push(&rule.model, output_text.clone());
            // same text under another model, and a near miss under the rule's model
            push("unrelated-model", output_text);
            let mut miss = rule.pattern.clone();
            miss.insert(miss.len() / 2, '#');
            push(&rule.model, format!("Sentence {j}: {miss}"));
            if rule.match_mode == gec_eval::report::MatchMode::Prefix {
                push(&rule.model, format!("Prefix missing: {}", rule.pattern));
            }
        }
    }
    let counts = pattern_counts(&corrections, &rules);
    let got: Vec<usize> = counts.iter().map(|c| c.count).collect();
    let synthetic_ok = got == expected;
    let mut detail = if synthetic_ok {
        format!("synthetic: {} rules, every count equals its k", rules.len())
    } else {
        format!("synthetic: counts {got:?} vs {expected:?}")
    };
    let mut pass = synthetic_ok;
    match std::env::var_os("GEC_PUBLISHED_CORRECTIONS") {
        Some(path) => {
            let published = gec_eval::gateway::load_corrections(Path::new(&path), None).unwrap();
            let yi = counts_for(&published, &rules, "Yi", "en", "grammatically correct");
            pass &= yi == YI_EN_GRAMMATICALLY_CORRECT;
            detail.push_str(&format!("; published Yi/EN \"grammatically correct\" = {yi} (expected 327)"));
        }
        None => detail.push_str("; published replay not run (GEC_PUBLISHED_CORRECTIONS unset)"),
    }
    outcome(pass, detail)
}

fn counts_for(
    corrections: &[Correction],
    rules: &[gec_eval::report::PatternRule],
    model: &str,
    lang: &str,
    pattern: &str,
) -> usize {
    let rule: Vec<_> = rules
        .iter()
        .filter(|r| r.model == model && r.language == lang && r.pattern == pattern)
        .cloned()
        .collect();
    pattern_counts(corrections, &rule)[0].count
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("corpus summary (Table 1)", table1),
        ("macro-average reproduction (Table 3)", macro_reproduction),
        ("rank reproduction (Table 5)", rank_reproduction),
        ("global ranking (Table 4)", global_ranking),
        ("prompt selection (Table 2)", prompt_selection),
        ("oracle suites", oracle_suites),
        ("formula invariants", formula_invariants),
        ("determinism", determinism),
        ("pattern counts", pattern_counts_criterion),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1?}]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
