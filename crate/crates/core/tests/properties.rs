mod common;

use common::{p, template, FIXTURE_TEMPLATES};
use metaforge_core::instance::{normalize_record, InstanceError};
use metaforge_core::testing::{random_instance, random_value, Fill};
use metaforge_core::{
    generate_report, language_chain, localized_label, new_instance, parse_instance, render_plan, serialize_jsonld, validate_instance,
    FieldValue, RenderMode, Template, ValuePath, WidgetType,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn round_trip(t: &Template, seed: u64, fill: Fill) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_instance(t, &mut rng, fill);
    let doc = serialize_jsonld(t, &x, false).unwrap();
    let back = parse_instance(t, &doc).unwrap();
    assert!(back.issues.is_empty(), "{:?}", back.issues);
    assert_eq!(normalize_record(&t.children, back.instance.root()), x.normalized(t));
}

/// Walks a serialized document and checks every value object's shape.
fn shape_ok(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(shape_ok),
        Value::Object(o) if o.contains_key("@id") => o.len() == 2 && o.contains_key("rdfs:label"),
        Value::Object(o) if o.contains_key("@value") => o.len() == 2 && o.contains_key("@type"),
        Value::Object(o) => o.iter().filter(|(k, _)| !k.starts_with('@')).all(|(_, v)| shape_ok(v)),
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jsonld_round_trip_valid(seed in any::<u64>(), which in 0usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        round_trip(&t, seed, Fill::Valid);
    }

    #[test]
    fn jsonld_round_trip_sparse(seed in any::<u64>(), which in 0usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        round_trip(&t, seed, Fill::Sparse);
    }

    #[test]
    fn valid_instances_serialize_strictly_with_good_shape(seed in any::<u64>(), which in 0usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        let x = random_instance(&t, &mut ChaCha8Rng::seed_from_u64(seed), Fill::Valid);
        let doc = serialize_jsonld(&t, &x, true).unwrap();
        let body: Vec<&Value> = doc.as_object().unwrap().iter().filter(|(k, _)| !k.starts_with('@')).map(|(_, v)| v).collect();
        prop_assert!(body.iter().all(|v| shape_ok(v)));
    }

    /// Random add/remove sequences keep repetition counts inside the
    /// cardinality bounds, and the errors fire exactly at the bounds.
    #[test]
    fn cardinality_state_machine(ops in proptest::collection::vec((0usize..4, any::<bool>(), 0usize..8), 1..60)) {
        let psych = template("psych_ds");
        let sink = template("kitchen_sink");
        let targets: [(&Template, &str); 4] = [
            (&psych, "variable_measured"),
            (&psych, "authors"),
            (&sink, "keywords"),
            (&sink, "contributors"),
        ];
        let mut psych_i = new_instance(&psych);
        let mut sink_i = new_instance(&sink);
        for (target, add, idx) in ops {
            let (t, key) = targets[target];
            let node = t.resolve_node(&key.parse().unwrap()).unwrap();
            let (min, max) = (node.cardinality.min as usize, node.cardinality.max.map(|m| m as usize));
            let inst = if target < 2 { &mut psych_i } else { &mut sink_i };
            let count = inst.repetition_count(t, &p(key)).unwrap();
            let result = if add {
                inst.add_repetition(t, &p(key))
            } else {
                let i = idx % count.max(1);
                inst.remove_repetition(t, &ValuePath::root().child(key, Some(i)))
            };
            match result {
                Ok(next) => {
                    let expected = if add { count + 1 } else { count - 1 };
                    prop_assert_eq!(next.repetition_count(t, &p(key)), Some(expected));
                    *inst = next;
                }
                Err(InstanceError::CardinalityOverflow { .. }) => prop_assert!(add && Some(count) == max),
                Err(InstanceError::CardinalityUnderflow { .. }) => prop_assert!(!add && count == min),
                Err(InstanceError::UnknownPath(_)) => prop_assert!(!add && count == 0),
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
            let now = inst.repetition_count(t, &p(key)).unwrap();
            prop_assert!(now >= min && max.is_none_or(|m| now <= m));
        }
    }

    /// Filling required fields one at a time, in any order, never lowers
    /// completeness; all filled gives 1.
    #[test]
    fn completeness_is_monotone(seed in any::<u64>(), which in 1usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inst = random_instance(&t, &mut rng, Fill::Sparse);
        let mut empty_required: Vec<ValuePath> = inst
            .values(&t)
            .into_iter()
            .filter(|(_, n, v)| n.is_required() && v.is_empty())
            .map(|(path, _, _)| path)
            .collect();
        empty_required.shuffle(&mut rng);
        let mut last = generate_report(&t, &inst).unwrap().completeness;
        for path in empty_required {
            let node = t.resolve_node(&path.node_path()).unwrap();
            let v = random_value(node.field().unwrap(), &mut rng);
            inst = inst.set_value(&t, &path, v).unwrap();
            let now = generate_report(&t, &inst).unwrap().completeness;
            prop_assert!(now >= last, "{now} < {last} after {path}");
            last = now;
        }
        let r = generate_report(&t, &inst).unwrap();
        prop_assert_eq!(r.counts.required_filled, r.counts.required_total);
    }

    #[test]
    fn set_value_is_a_frame(seed in any::<u64>(), which in 1usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&t, &mut rng, Fill::Sparse);
        let slots: Vec<(ValuePath, FieldValue)> = inst
            .values(&t)
            .into_iter()
            .filter(|(_, n, _)| !n.field().unwrap().field_type.is_render_only())
            .map(|(path, n, _)| (path, random_value(n.field().unwrap(), &mut rng)))
            .collect();
        prop_assume!(!slots.is_empty());
        let (target, v) = slots.choose(&mut rng).unwrap().clone();
        let next = inst.set_value(&t, &target, v).unwrap();
        for (path, _, before) in inst.values(&t) {
            if path != target {
                prop_assert_eq!(next.get(&t, &path), Some(before));
            }
        }
    }

    #[test]
    fn quality_statuses_partition_field_slots(seed in any::<u64>(), which in 0usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        let inst = random_instance(&t, &mut ChaCha8Rng::seed_from_u64(seed), Fill::Sparse);
        let r = generate_report(&t, &inst).unwrap();
        let paths: Vec<ValuePath> = inst.values(&t).into_iter().map(|(path, _, _)| path).collect();
        let reported: Vec<ValuePath> = r.field_statuses.iter().map(|e| e.path.clone()).collect();
        prop_assert_eq!(paths, reported);
        let c = r.counts;
        prop_assert_eq!((c.required_total + c.optional_total) as usize, r.field_statuses.len());
    }

    #[test]
    fn validation_is_pure(seed in any::<u64>(), which in 0usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        let inst = random_instance(&t, &mut ChaCha8Rng::seed_from_u64(seed), Fill::Sparse);
        let a = serde_json::to_vec(&validate_instance(&t, &inst, true).unwrap()).unwrap();
        let b = serde_json::to_vec(&validate_instance(&t, &inst, true).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn view_plans_are_read_only(seed in any::<u64>(), which in 0usize..5) {
        let t = template(FIXTURE_TEMPLATES[which]);
        let inst = random_instance(&t, &mut ChaCha8Rng::seed_from_u64(seed), Fill::Sparse);
        let plan = render_plan(&t, &inst, RenderMode::View, &language_chain("en")).unwrap();
        prop_assert!(plan.widgets.iter().all(|w| !w.editable && w.widget_type != WidgetType::RepeatControls));
    }
}

#[test]
fn new_instance_round_trips_exactly() {
    for name in FIXTURE_TEMPLATES {
        let t = template(name);
        let i = new_instance(&t);
        let doc = serialize_jsonld(&t, &i, false).unwrap();
        assert_eq!(parse_instance(&t, &doc).unwrap().instance.root(), i.root(), "{name}");
    }
}

#[test]
fn german_request_falls_back_to_english() {
    for name in ["rnaseq_assay", "investigator", "psych_ds"] {
        let t = template(name);
        let chain = language_chain("de");
        for (_, node) in t.walk() {
            let (label, diags) = localized_label(node, &chain);
            assert_eq!(Some(label.as_str()), node.label.get("en"));
            assert_eq!(diags.len(), 1);
        }
        let plan = render_plan(&t, &new_instance(&t), RenderMode::Entry, &chain).unwrap();
        assert!(plan.widgets.iter().all(|w| !w.label.is_empty()));
        let label_diags = plan.diagnostics.iter().filter(|d| d.text == "label").count();
        assert_eq!(label_diags, plan.widgets.len(), "{name}");
    }
}

#[test]
fn flat_template_widget_count() {
    for name in ["rnaseq_assay", "empty"] {
        let t = template(name);
        let plan = render_plan(&t, &new_instance(&t), RenderMode::Edit, &language_chain("en")).unwrap();
        assert_eq!(plan.widgets.len(), t.walk().len());
    }
}
