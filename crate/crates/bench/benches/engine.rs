use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use metaforge_core::template::TermSourceSpec;
use metaforge_core::testing::{random_instance, Fill};
use metaforge_core::{
    generate_report, language_chain, parse_instance, parse_template_str, render_plan, serialize_jsonld, template_fingerprint,
    validate_instance, RenderMode, Template,
};
use metaforge_gateway::{search_terms, Vocabulary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn template(name: &str) -> Template {
    parse_template_str(&std::fs::read_to_string(fixtures().join(format!("templates/{name}.json"))).unwrap()).unwrap()
}

fn engine(c: &mut Criterion) {
    for name in ["rnaseq_assay", "kitchen_sink"] {
        let t = template(name);
        let text = std::fs::read_to_string(fixtures().join(format!("templates/{name}.json"))).unwrap();
        let x = random_instance(&t, &mut ChaCha8Rng::seed_from_u64(1), Fill::Valid);
        let doc = serialize_jsonld(&t, &x, false).unwrap();
        let chain = language_chain("en");

        c.bench_function(&format!("{name}/parse_template"), |b| b.iter(|| parse_template_str(black_box(&text)).unwrap()));
        c.bench_function(&format!("{name}/fingerprint"), |b| b.iter(|| template_fingerprint(black_box(&t))));
        c.bench_function(&format!("{name}/serialize"), |b| b.iter(|| serialize_jsonld(&t, black_box(&x), true).unwrap()));
        c.bench_function(&format!("{name}/parse_instance"), |b| b.iter(|| parse_instance(&t, black_box(&doc)).unwrap()));
        c.bench_function(&format!("{name}/validate"), |b| b.iter(|| validate_instance(&t, black_box(&x), true).unwrap()));
        c.bench_function(&format!("{name}/render_plan"), |b| {
            b.iter(|| render_plan(&t, black_box(&x), RenderMode::Entry, &chain).unwrap())
        });
        c.bench_function(&format!("{name}/quality_report"), |b| b.iter(|| generate_report(&t, black_box(&x)).unwrap()));
        c.bench_function(&format!("{name}/random_instance"), |b| {
            b.iter_batched(|| ChaCha8Rng::seed_from_u64(2), |mut rng| random_instance(&t, &mut rng, Fill::Sparse), BatchSize::SmallInput)
        });
    }
}

fn term_search(c: &mut Criterion) {
    let vocab = Vocabulary::load(&fixtures().join("gateway/vocabulary.json")).unwrap();
    let sources = [
        TermSourceSpec::Ontology { acronym: "NCBITAXON".into() },
        TermSourceSpec::ValueSet { acronym: "ANALYTE".into(), value_set_id: "https://ex.org/vs/analyte".into() },
    ];
    c.bench_function("ontology/search", |b| b.iter(|| search_terms(&vocab, &sources, black_box("dna"), 10).unwrap()));
}

criterion_group!(benches, engine, term_search);
criterion_main!(benches);
