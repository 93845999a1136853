//! Seeded random instances for property tests, benchmarks and the
//! acceptance suite.

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::identifier::{mod11_2_check_char, AuthoritySource, COMPTOX_PREFIX, ORCID_PREFIX, ROR_PREFIX};
use crate::instance::{check_field_value, MetadataInstance, Record, Slots};
use crate::template::{FieldSpec, FieldType, Granularity, NodeKind, NumberKind, Severity, Template, TemplateNode};
use crate::value::FieldValue;

const ALPHABET: &[char] = &[
    'a', 'b', 'k', 'z', 'A', 'Q', '0', '7', ' ', '-', '.', '\'', '"', '&', '<', '/', 'é', 'ß', 'ü', '中', '\\',
];
const ROR_ALPHABET: &[u8] = b"0123456789abcdefghjkmnpqrstvwxyz";

/// How densely [`random_instance`] fills a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    /// Every required field and every repetition holds a valid value, so
    /// strict validation passes.
    Valid,
    /// Roughly a quarter of the slots stay Empty; required fields included.
    Sparse,
}

/// Builds a random instance of `t`. All non-Empty values satisfy their
/// field's constraints.
pub fn random_instance<R: Rng>(t: &Template, rng: &mut R, fill: Fill) -> MetadataInstance {
    MetadataInstance::from_record(t, random_record(&t.children, rng, fill))
}

fn random_record<R: Rng>(nodes: &[TemplateNode], rng: &mut R, fill: Fill) -> Record {
    let mut rec = Record::default();
    for n in nodes {
        let count = repetitions(n, rng);
        let slots = match &n.kind {
            NodeKind::Field(spec) if spec.field_type == FieldType::Checkbox => Slots::Field(checkbox_values(n, spec, rng, fill)),
            NodeKind::Field(spec) => Slots::Field(
                (0..count)
                    .map(|_| {
                        let keep_empty = fill == Fill::Sparse && rng.gen_bool(0.25);
                        if keep_empty {
                            FieldValue::Empty
                        } else {
                            random_value(spec, rng)
                        }
                    })
                    .collect(),
            ),
            NodeKind::Element(children) => Slots::Element((0..count).map(|_| random_record(children, rng, fill)).collect()),
        };
        rec.insert(n.key.clone(), slots);
    }
    rec
}

fn repetitions<R: Rng>(n: &TemplateNode, rng: &mut R) -> usize {
    if !n.is_multi_valued() {
        return 1;
    }
    let min = n.cardinality.min as usize;
    let hi = n.cardinality.max.map_or(min + 3, |m| (m as usize).min(min + 3));
    rng.gen_range(min..=hi.max(min))
}

fn checkbox_values<R: Rng>(n: &TemplateNode, spec: &FieldSpec, rng: &mut R, fill: Fill) -> Vec<FieldValue> {
    let mut labels: Vec<&str> = spec.constraints.literals.iter().map(|l| l.label.as_str()).collect();
    labels.shuffle(rng);
    let min = (n.cardinality.min as usize).min(labels.len());
    let max = n.cardinality.max.map_or(labels.len(), |m| m as usize).min(labels.len());
    let count = rng.gen_range(min..=max.max(min));
    let mut vals: Vec<FieldValue> = labels[..count].iter().map(|l| FieldValue::string(*l)).collect();
    if fill == Fill::Sparse && rng.gen_bool(0.25) {
        vals.clear();
    }
    vals
}

/// A random value satisfying `spec`'s type and constraints, or Empty when
/// none could be found.
pub fn random_value<R: Rng>(spec: &FieldSpec, rng: &mut R) -> FieldValue {
    for _ in 0..32 {
        let v = candidate(spec, rng);
        let ok = check_field_value(spec, &v).iter().all(|(_, sev, _)| *sev != Severity::Error);
        if ok {
            return v;
        }
    }
    FieldValue::Empty
}

fn candidate<R: Rng>(spec: &FieldSpec, rng: &mut R) -> FieldValue {
    let k = &spec.constraints;
    let dt = spec.literal_datatype();
    match spec.field_type {
        FieldType::Text => match k.regex.as_ref() {
            Some(p) => FieldValue::literal(regex_sample(p.source(), rng), dt),
            None => {
                let lo = k.min_length.unwrap_or(1).max(1) as usize;
                let hi = k.max_length.map_or(lo + 16, |m| m as usize).max(lo);
                FieldValue::literal(random_text(rng, lo, hi), dt)
            }
        },
        FieldType::Number => {
            let lo = k.min_value.as_ref().map_or(-1000, |d| clamp_int(&d.to_string()));
            let hi = k.max_value.as_ref().map_or(1000, |d| clamp_int(&d.to_string())).max(lo);
            let int = rng.gen_range(lo..=hi);
            match k.number_kind.unwrap_or_default() {
                NumberKind::Integer => FieldValue::literal(int.to_string(), dt),
                NumberKind::Decimal => {
                    let frac = rng.gen_range(0..100);
                    let text = if rng.gen_bool(0.3) { int.to_string() } else { format!("{int}.{frac:02}") };
                    FieldValue::literal(text, dt)
                }
            }
        }
        FieldType::Temporal => {
            let date = format!("{:04}-{:02}-{:02}", rng.gen_range(1900..2100), rng.gen_range(1..=12), rng.gen_range(1..=28));
            let time = format!("{:02}:{:02}:{:02}", rng.gen_range(0..24), rng.gen_range(0..60), rng.gen_range(0..60));
            let text = match k.granularity.unwrap_or_default() {
                Granularity::Date => date,
                Granularity::Datetime => format!("{date}T{time}Z"),
                Granularity::Time => time,
            };
            FieldValue::literal(text, dt)
        }
        FieldType::Boolean => FieldValue::literal(if rng.gen() { "true" } else { "false" }, dt),
        FieldType::Link | FieldType::Image | FieldType::Video => {
            FieldValue::literal(format!("https://example.org/r/{}", rng.gen_range(0..1_000_000u32)), dt)
        }
        FieldType::List | FieldType::Checkbox => match k.literals.choose(rng) {
            Some(l) => FieldValue::string(l.label.clone()),
            None => FieldValue::Empty,
        },
        FieldType::ControlledTerm => {
            let acronym = k.sources.choose(rng).map_or("TERM", |s| s.acronym());
            FieldValue::term(
                format!("http://purl.obolibrary.org/obo/{}_{:07}", acronym, rng.gen_range(0..10_000_000u32)),
                random_text(rng, 1, 24),
            )
        }
        FieldType::ExternalAuthority => {
            let source = k.authority.unwrap_or_else(|| *AuthoritySource::ALL.choose(rng).unwrap());
            FieldValue::authority(source, random_identifier(source, rng), random_text(rng, 1, 24))
        }
    }
}

fn clamp_int(text: &str) -> i64 {
    let int_part = text.split('.').next().unwrap_or("0");
    int_part.parse::<i64>().unwrap_or(0).clamp(-1_000_000, 1_000_000)
}

fn random_text<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> String {
    let len = rng.gen_range(lo..=hi);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn regex_sample<R: Rng>(source: &str, rng: &mut R) -> String {
    let Ok(strategy) = proptest::string::string_regex(source) else {
        return String::new();
    };
    let seed: [u8; 32] = rng.gen();
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, &seed));
    strategy.new_tree(&mut runner).map(|t| t.current()).unwrap_or_default()
}

/// A well-formed identifier IRI for `source`; ORCIDs carry a correct check
/// character.
pub fn random_identifier<R: Rng>(source: AuthoritySource, rng: &mut R) -> String {
    match source {
        AuthoritySource::Orcid => {
            let body: String = (0..15).map(|_| char::from(b'0' + rng.gen_range(0..10))).collect();
            let check = mod11_2_check_char(&body).unwrap();
            format!("{ORCID_PREFIX}{}-{}-{}-{}{}", &body[0..4], &body[4..8], &body[8..12], &body[12..15], check)
        }
        AuthoritySource::Ror => {
            let mid: String = (0..6).map(|_| char::from(*ROR_ALPHABET.choose(rng).unwrap())).collect();
            format!("{ROR_PREFIX}0{mid}{:02}", rng.gen_range(0..100))
        }
        AuthoritySource::Comptox => format!("{COMPTOX_PREFIX}DTXSID{}", rng.gen_range(1_000_000..100_000_000u64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_instance;
    use crate::template::parse_template_str;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn valid_fill_passes_strict_validation() {
        let t = parse_template_str(
            r#"{"id":"https://ex.org/t/gen","version":"1.0.0","children":[
              {"kind":"field","key":"code","fieldType":"text","required":true,"constraints":{"regex":"[A-Z]{3}-\\d{2}"}},
              {"kind":"field","key":"n","fieldType":"number","constraints":{"minValue":"2.5","maxValue":"3"}},
              {"kind":"field","key":"tags","fieldType":"checkbox","required":true,"constraints":{"literals":["a","b","c"]}},
              {"kind":"field","key":"who","fieldType":"external_authority","constraints":{"authority":"ror"}},
              {"kind":"element","key":"parts","cardinality":{"min":1,"max":4},"children":[
                {"kind":"field","key":"at","fieldType":"temporal","constraints":{"granularity":"datetime"}}]}]}"#,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let i = random_instance(&t, &mut rng, Fill::Valid);
            let errors: Vec<_> = validate_instance(&t, &i, true).unwrap().into_iter().filter(|x| x.is_error()).collect();
            assert!(errors.is_empty(), "{errors:?}");
        }
    }

    #[test]
    fn generated_orcids_are_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for source in AuthoritySource::ALL {
            for _ in 0..100 {
                assert!(source.is_canonical_iri(&random_identifier(source, &mut rng)));
            }
        }
    }
}
