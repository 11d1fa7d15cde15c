#![allow(dead_code)]

//! Shared generators and brute-force oracles for the integration suites.
//! Everything is driven by an explicit ChaCha12 seed so failures reproduce.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use redactkit::model::{AnnotatedDocument, Document, EntityLabel, EntitySpan};
use redactkit::redact::{redact_document, RemapMode, SegmentKind};
use redactkit::Error;
use redactkit::RedactionPolicy;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn pick<'a, T>(rng: &mut ChaCha12Rng, items: &'a [T]) -> &'a T {
    &items[(rng.next_u64() % items.len() as u64) as usize]
}

pub fn range(rng: &mut ChaCha12Rng, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() % (hi - lo) as u64) as usize
}

/// Text over a deliberately awkward alphabet: multibyte letters, digits,
/// and the punctuation the recognizers care about.
pub fn gen_text(rng: &mut ChaCha12Rng, max_chars: usize) -> String {
    const ALPHABET: &[char] = &[
        'a', 'b', 'z', 'é', 'ß', '文', ' ', ' ', '.', '-', '@', ':', '/', '%', '0', '1', '4',
        '9', '<', '>', '\n',
    ];
    let n = range(rng, 0, max_chars + 1);
    (0..n).map(|_| *pick(rng, ALPHABET)).collect()
}

/// Sorted, pairwise-disjoint spans over a text of `n_chars` chars.
pub fn gen_disjoint_spans(rng: &mut ChaCha12Rng, n_chars: usize) -> Vec<(usize, usize, EntityLabel)> {
    let mut spans = Vec::new();
    let mut cursor = 0usize;
    while cursor < n_chars {
        if rng.next_u64().is_multiple_of(3) {
            let start = cursor;
            let end = range(rng, start + 1, (start + 6).min(n_chars) + 1).min(n_chars);
            if end > start {
                spans.push((start, end, *pick(rng, &EntityLabel::ALL)));
                cursor = end;
                continue;
            }
        }
        cursor += range(rng, 1, 4);
    }
    spans
}

pub fn annotated(text: &str, spans: &[(usize, usize, EntityLabel)]) -> AnnotatedDocument {
    let doc = Document::new("doc", text);
    let spans = spans
        .iter()
        .map(|&(s, e, l)| EntitySpan::over("doc", text, s, e, l).expect("generated in bounds"))
        .collect();
    AnnotatedDocument::new(doc, spans).expect("generated spans are valid")
}

/// Naive redaction by splicing strings, the slow obvious way.
pub fn naive_redact(text: &str, spans: &[(usize, usize, EntityLabel)], policy: &RedactionPolicy) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut cursor = 0usize;
    for &(start, end, label) in spans {
        if !policy.applies_to(label) {
            continue;
        }
        out.extend(&chars[cursor..start]);
        out.push_str(policy.token_for(label).expect("policy has all tokens"));
        cursor = end;
    }
    out.extend(&chars[cursor..]);
    out
}

/// Where the brute-force oracle says an original offset lands.
pub enum OracleRemap {
    At(usize),
    Inside { label: EntityLabel, clamp_to: usize },
}

/// Prefix-sum remap oracle over the policy-applied spans.
pub fn oracle_remap(
    text_len: usize,
    spans: &[(usize, usize, EntityLabel)],
    policy: &RedactionPolicy,
    offset: usize,
) -> OracleRemap {
    assert!(offset <= text_len);
    let mut delta = 0isize;
    for &(start, end, label) in spans {
        if !policy.applies_to(label) {
            continue;
        }
        let token_len = policy.token_for(label).expect("policy has all tokens").chars().count();
        if end <= offset {
            delta += token_len as isize - (end - start) as isize;
        } else if start < offset {
            // Strictly inside this replacement.
            let clamp_to = (start as isize + delta) as usize;
            return OracleRemap::Inside { label, clamp_to };
        }
    }
    OracleRemap::At((offset as isize + delta) as usize)
}

/// Runs one generated document through redaction and checks every
/// invariant against the naive oracles. Returns a description of the first
/// violation, if any.
pub fn check_redaction_invariants(
    text: &str,
    spans: &[(usize, usize, EntityLabel)],
    policy: &RedactionPolicy,
) -> Result<(), String> {
    let ad = annotated(text, spans);
    let red = redact_document(&ad, policy).map_err(|e| format!("redact failed: {e}"))?;

    let expect = naive_redact(text, spans, policy);
    if red.text != expect {
        return Err(format!("text mismatch: {:?} vs naive {:?}", red.text, expect));
    }

    let n_chars = text.chars().count();
    let map = &red.map;
    if map.orig_len != n_chars || map.new_len != red.text.chars().count() {
        return Err(format!(
            "map lengths {}→{} disagree with texts {}→{}",
            map.orig_len,
            map.new_len,
            n_chars,
            red.text.chars().count()
        ));
    }

    let mut orig = 0usize;
    let mut new = 0usize;
    for seg in &map.segments {
        if seg.orig_start != orig || seg.new_start != new {
            return Err(format!("segment gap at {orig}→{new}: {seg:?}"));
        }
        if matches!(seg.kind, SegmentKind::Copy)
            && seg.orig_end - seg.orig_start != seg.new_end - seg.new_start
        {
            return Err(format!("copy segment changed length: {seg:?}"));
        }
        orig = seg.orig_end;
        new = seg.new_end;
    }
    if orig != map.orig_len || new != map.new_len {
        return Err("segments do not tile the texts".to_string());
    }

    let mut last_clamp = 0usize;
    for offset in 0..=n_chars {
        let strict = map.remap(offset, RemapMode::Strict);
        let clamp = map.remap(offset, RemapMode::Clamp).map_err(|e| e.to_string())?;
        match oracle_remap(n_chars, spans, policy, offset) {
            OracleRemap::At(want) => {
                match strict {
                    Ok(got) if got == want => {}
                    other => return Err(format!("strict remap({offset}) = {other:?}, want {want}")),
                }
                if clamp != want {
                    return Err(format!("clamp remap({offset}) = {clamp}, want {want}"));
                }
            }
            OracleRemap::Inside { label, clamp_to } => {
                match strict {
                    Err(Error::InsideRedaction { label: got, .. }) if got == label => {}
                    other => {
                        return Err(format!(
                            "strict remap({offset}) = {other:?}, want InsideRedaction({label})"
                        ))
                    }
                }
                if clamp != clamp_to {
                    return Err(format!("clamp remap({offset}) = {clamp}, want {clamp_to}"));
                }
            }
        }
        if offset > 0 && clamp < last_clamp {
            return Err(format!("clamp remap not monotone at {offset}"));
        }
        last_clamp = clamp;
    }

    let n_policy_spans = spans.iter().filter(|(_, _, l)| policy.applies_to(*l)).count();
    if red.applied.len() != n_policy_spans {
        return Err(format!(
            "applied {} spans, policy covers {n_policy_spans}",
            red.applied.len()
        ));
    }
    Ok(())
}
