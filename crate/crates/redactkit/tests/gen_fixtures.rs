//! Builds the bundled QA corpus under `tests/data/`. Every expected number
//! in the companion stats file is tallied while the text is being pieced
//! together, so regenerating the fixture never runs the code the fixture
//! later checks.
//!
//! The files are committed; regenerate only when the wire format changes:
//!
//! ```text
//! cargo test -p redactkit --test gen_fixtures -- --ignored
//! ```

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use common::{pick, range, rng};
use redactkit::model::EntityLabel;

const SEED: u64 = 42;

const PEOPLE: &[&str] = &[
    "Marie Skłodowska",
    "José Álvarez",
    "Zoë Müller",
    "Li Wén",
    "Anna Kovács",
    "Dmitri Ivanov",
    "Ágnes Szabó",
];
const ORGS: &[&str] = &[
    "the Curie Institute",
    "Volt GmbH",
    "Norsk Hydro",
    "the Royal Academy",
    "Belle Époque Press",
];
const GPES: &[&str] = &["Paris", "São Paulo", "Kraków", "Warsaw", "Zürich"];
const LOCS: &[&str] = &["the Vistula river", "Mont Blanc", "the Baltic coast"];
const DATES: &[&str] = &["2021-03-05", "12/31/1999", "3/4/07", "1867-11-07"];
const TIMES: &[&str] = &["12:30", "9:05:59 PM", "23:59"];
const PERCENTS: &[&str] = &["97.5%", "12%", "3.25%"];
const QUANTITIES: &[&str] = &["forty kilograms", "two hundred metres"];
const WORKS: &[&str] = &["Radioactive Substances", "Der Zauberberg"];
const EMAILS: &[&str] = &[
    "marie@curie.example.org",
    "lab.admin@institute.example.com",
];
const SSNS: &[&str] = &["078-05-1120", "219-09-9999"];
const CARDS: &[&str] = &["4111 1111 1111 1111", "5500-0000-0000-0004"];

/// Connective text. No digits and none of `@ % : / -`, so the pattern
/// recognizers can never fire inside it.
const FILLER: &[&str] = &[
    "joined the laboratory",
    "after the long winter",
    "according to the minutes",
    "the committee adjourned early",
    "über die neue Straße",
    "śnieg padał cicho",
    "the results were archived",
    "everyone signed the ledger",
    "carefully noted in the margin",
];

/// Clean-answer snippets; inserted as plain text, never annotated.
const SNIPPETS: &[&str] = &[
    "the sealed archive",
    "a quiet corridor",
    "the northern annex",
    "la petite salle",
    "the glass cabinet",
];

const QUESTIONS: &[&str] = &[
    "Where was the work carried out?",
    "Who presided over the session?",
    "What was recorded in the ledger?",
    "Which part of the building was used?",
];

fn pii_piece(r: &mut ChaCha12Rng) -> (&'static str, EntityLabel) {
    use EntityLabel::*;
    let pools: &[(&[&str], EntityLabel)] = &[
        (PEOPLE, Person),
        (ORGS, Org),
        (GPES, Gpe),
        (LOCS, Loc),
        (DATES, Date),
        (TIMES, Time),
        (PERCENTS, Percent),
        (QUANTITIES, Quantity),
        (WORKS, WorkOfArt),
        (EMAILS, Email),
        (SSNS, Ssn),
        (CARDS, CreditCard),
    ];
    let (pool, label) = pools[(r.next_u64() % pools.len() as u64) as usize];
    (pick(r, pool), label)
}

/// One document part under construction; offsets are counted in chars as
/// text is appended, so spans are correct by construction.
#[derive(Default)]
struct Part {
    text: String,
    chars: usize,
    spans: Vec<(usize, usize, EntityLabel)>,
}

impl Part {
    fn push(&mut self, s: &str) -> (usize, usize) {
        let start = self.chars;
        self.text.push_str(s);
        self.chars += s.chars().count();
        (start, self.chars)
    }

    fn push_pii(&mut self, s: &str, label: EntityLabel) -> (usize, usize) {
        let span = self.push(s);
        self.spans.push((span.0, span.1, label));
        span
    }

    fn slice(&self, start: usize, end: usize) -> String {
        self.text.chars().skip(start).take(end - start).collect()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Clean { answers: usize },
    Overlap { with_clean_first: bool },
    Unanswerable,
    ZeroPii,
}

struct Built {
    corpus_line: String,
    ann_lines: Vec<String>,
    count: usize,
    covered: usize,
    total: usize,
    labels: Vec<EntityLabel>,
    outcome: serde_json::Value,
}

fn build_record(r: &mut ChaCha12Rng, id: &str, kind: Kind) -> Built {
    let mut ctx = Part::default();
    let with_pii = !matches!(kind, Kind::ZeroPii);

    // Opening sentence with the first clean-answer snippet.
    ctx.push(pick(r, FILLER));
    ctx.push(" near ");
    let snippet_a = ctx.push(pick(r, SNIPPETS));
    ctx.push(". ");

    let n_pii = if with_pii { range(r, 1, 4) } else { 0 };
    let mut overlap_target: Option<((usize, usize), EntityLabel)> = None;
    for i in 0..n_pii {
        ctx.push(pick(r, FILLER));
        ctx.push(", ");
        let (piece, label) = pii_piece(r);
        let span = ctx.push_pii(piece, label);
        if i == 0 {
            overlap_target = Some((span, label));
        }
        ctx.push(" ");
        ctx.push(pick(r, FILLER));
        ctx.push(". ");
    }

    // Second snippet for multi-answer records.
    ctx.push(pick(r, FILLER));
    ctx.push(" beside ");
    let snippet_b = ctx.push(pick(r, SNIPPETS));
    ctx.push(".");

    let mut question = Part::default();
    question.push(pick(r, QUESTIONS));
    if with_pii && range(r, 0, 100) < 22 {
        question.push(" Think of ");
        let (piece, label) = pii_piece(r);
        question.push_pii(piece, label);
        question.push(".");
    }

    let mut answers: Vec<(String, usize)> = Vec::new();
    let mut outcome = json!({ "kind": "adjusted" });
    let mut is_answerable = true;
    match kind {
        Kind::Clean { answers: n } => {
            answers.push((ctx.slice(snippet_a.0, snippet_a.1), snippet_a.0));
            if n > 1 {
                answers.push((ctx.slice(snippet_b.0, snippet_b.1), snippet_b.0));
            }
        }
        Kind::Overlap { with_clean_first } => {
            let ((start, end), label) = overlap_target.expect("overlap records carry PII");
            if with_clean_first {
                answers.push((ctx.slice(snippet_a.0, snippet_a.1), snippet_a.0));
            }
            answers.push((ctx.slice(start, end), start));
            outcome = json!({ "kind": "answer_redacted", "label": label.as_str() });
        }
        Kind::Unanswerable => {
            is_answerable = false;
        }
        Kind::ZeroPii => {
            answers.push((ctx.slice(snippet_a.0, snippet_a.1), snippet_a.0));
        }
    }
    for (text, start) in &answers {
        let end = start + text.chars().count();
        assert_eq!(&ctx.slice(*start, end), text, "answer slices line up");
    }

    let corpus_line = json!({
        "id": id,
        "context": ctx.text,
        "question": question.text,
        "answers": answers
            .iter()
            .map(|(text, start)| json!({ "text": text, "answer_start": start }))
            .collect::<Vec<_>>(),
        "is_answerable": is_answerable,
    })
    .to_string();

    let span_json = |spans: &[(usize, usize, EntityLabel)]| {
        spans
            .iter()
            .map(|&(s, e, l)| json!({ "start": s, "end": e, "label": l.as_str() }))
            .collect::<Vec<_>>()
    };
    let mut ann_lines = Vec::new();
    if !ctx.spans.is_empty() {
        // Most lines use the bare record id for context spans; a quarter
        // use the explicit key, exercising the alias.
        let key = if range(r, 0, 4) == 0 {
            format!("{id}#context")
        } else {
            id.to_string()
        };
        ann_lines
            .push(json!({ "doc_id": key, "spans": span_json(&ctx.spans) }).to_string());
    }
    if !question.spans.is_empty() {
        ann_lines.push(
            json!({ "doc_id": format!("{id}#question"), "spans": span_json(&question.spans) })
                .to_string(),
        );
    }

    let all_spans = ctx.spans.iter().chain(&question.spans);
    Built {
        corpus_line,
        ann_lines,
        count: ctx.spans.len() + question.spans.len(),
        covered: all_spans.clone().map(|(s, e, _)| e - s).sum(),
        total: ctx.chars + question.chars,
        labels: all_spans.map(|&(_, _, l)| l).collect(),
        outcome,
    }
}

#[test]
#[ignore = "writes the bundled fixture files under tests/data/"]
fn regenerate_qa_fixture() {
    let mut r = rng(SEED);

    let mut kinds = Vec::new();
    kinds.extend(std::iter::repeat_n(Kind::Clean { answers: 1 }, 90));
    kinds.extend(std::iter::repeat_n(Kind::Clean { answers: 2 }, 30));
    kinds.extend(std::iter::repeat_n(Kind::Overlap { with_clean_first: false }, 30));
    kinds.extend(std::iter::repeat_n(Kind::Overlap { with_clean_first: true }, 10));
    kinds.extend(std::iter::repeat_n(Kind::Unanswerable, 20));
    kinds.extend(std::iter::repeat_n(Kind::ZeroPii, 20));
    assert_eq!(kinds.len(), 200);
    let mut keyed: Vec<(u64, Kind)> = kinds.into_iter().map(|k| (r.next_u64(), k)).collect();
    keyed.sort_by_key(|(key, _)| *key);

    let mut corpus = String::new();
    let mut annotations = String::new();
    let mut histogram: BTreeMap<&str, u64> =
        EntityLabel::ALL.iter().map(|l| (l.as_str(), 0)).collect();
    let mut per_record = serde_json::Map::new();
    let mut outcomes = serde_json::Map::new();
    let mut n_with_pii = 0usize;

    for (i, (_, kind)) in keyed.iter().enumerate() {
        let id = format!("rec{i:03}");
        let built = build_record(&mut r, &id, *kind);
        corpus.push_str(&built.corpus_line);
        corpus.push('\n');
        for line in &built.ann_lines {
            annotations.push_str(line);
            annotations.push('\n');
        }
        if built.count > 0 {
            n_with_pii += 1;
        }
        for label in &built.labels {
            *histogram.get_mut(label.as_str()).unwrap() += 1;
        }
        per_record.insert(
            id.clone(),
            json!({
                "count": built.count,
                "covered": built.covered,
                "total": built.total,
            }),
        );
        outcomes.insert(id, built.outcome);
    }

    assert_eq!(n_with_pii, 180, "exactly the zero-PII records carry no spans");
    let expected = json!({
        "n_records": 200,
        "redaction_rate_pct": 90.0,
        "histogram": histogram,
        "per_record": per_record,
        "outcomes": outcomes,
    });

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("qa_mini.jsonl"), corpus).unwrap();
    fs::write(dir.join("qa_mini_annotations.jsonl"), annotations).unwrap();
    fs::write(
        dir.join("qa_mini_expected_stats.json"),
        serde_json::to_string_pretty(&expected).unwrap(),
    )
    .unwrap();
}
