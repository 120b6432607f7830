use std::fmt::Write as _;

use super::ModelArtifact;
use crate::error::{Error, Result};

/// 17 significant digits, scientific notation: always round-trips an f64.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    let body: Vec<String> = items.iter().map(f).collect();
    format!("[{}]", body.join(", "))
}

/// Canonical document: keys sorted, one top-level key per line.
pub(crate) fn write(a: &ModelArtifact) -> String {
    let m = &a.metadata;
    let metadata = format!(
        "{{\"capacity\": {}, \"created_at\": {}, \"inverter_id\": {}, \"target\": {}, \"training_seed\": {}}}",
        fmt_f64(m.capacity),
        fmt_str(&m.created_at),
        m.inverter_id,
        fmt_str(m.target.as_str()),
        m.training_seed
    );
    let fields: [(&str, String); 14] = [
        ("base_score", fmt_f64(a.base_score)),
        ("format_version", a.format_version.to_string()),
        ("input_name", fmt_str(&a.input_name)),
        ("input_shape", list(&a.input_shape, |v| v.to_string())),
        ("leaf_weights", list(&a.leaf_weights, |v| fmt_f64(*v))),
        ("metadata", metadata),
        ("nodes_falsenodeids", list(&a.nodes_falsenodeids, |v| v.to_string())),
        ("nodes_featureids", list(&a.nodes_featureids, |v| v.to_string())),
        ("nodes_modes", list(&a.nodes_modes, |v| fmt_str(v.as_str()))),
        ("nodes_nodeids", list(&a.nodes_nodeids, |v| v.to_string())),
        ("nodes_treeids", list(&a.nodes_treeids, |v| v.to_string())),
        ("nodes_truenodeids", list(&a.nodes_truenodeids, |v| v.to_string())),
        ("nodes_values", list(&a.nodes_values, |v| fmt_f64(*v))),
        ("output_name", fmt_str(&a.output_name)),
    ];
    let mut out = String::from("{\n");
    for (i, (k, v)) in fields.iter().enumerate() {
        let sep = if i + 1 == fields.len() { "" } else { "," };
        let _ = writeln!(out, "  \"{k}\": {v}{sep}");
    }
    out.push_str("}\n");
    out
}

pub(crate) fn parse(bytes: &[u8]) -> Result<ModelArtifact> {
    if let Err(e) = std::str::from_utf8(bytes) {
        return Err(Error::Parse {
            offset: e.valid_up_to(),
            message: "artifact is not valid UTF-8".into(),
        });
    }
    serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })
}

/// serde_json reports 1-based line and column; the column counts bytes.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::*;
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.0, -0.0, 1.0 / 3.0, 9.443_289_756_774_9, 1e-300, -2.5e17, f64::MAX, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(2.5), "2.5000000000000000e0");
    }

    #[test]
    fn document_has_sorted_keys() {
        let a = export_model(&stump_ensemble(), metadata(Target::Active)).unwrap();
        let text = a.to_canonical_string();
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.trim_start().strip_prefix('"'))
            .map(|l| l.split('"').next().unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert_eq!(keys.len(), 14);
        assert!(text.contains("\"nodes_modes\": [\"BRANCH_LEQ\", \"LEAF\", \"LEAF\"]"));
    }

    #[test]
    fn parse_error_carries_byte_offset() {
        let a = export_model(&stump_ensemble(), metadata(Target::Active)).unwrap();
        let text = a.to_canonical_string();
        let at = text.find("\"format_version\": 1").unwrap() + "\"format_version\": ".len();
        let broken = format!("{}x{}", &text[..at], &text[at + 1..]);
        match ModelArtifact::parse(broken.as_bytes()) {
            Err(Error::Parse { offset, .. }) => assert!(offset.abs_diff(at) <= 1, "{offset} vs {at}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_numbers_are_rejected() {
        let a = export_model(&stump_ensemble(), metadata(Target::Active)).unwrap();
        let text = a.to_canonical_string().replacen("2.5000000000000000e0", "1e999", 1);
        assert!(matches!(ModelArtifact::parse(text.as_bytes()), Err(Error::Parse { .. })));
        let text = a.to_canonical_string().replacen("2.5000000000000000e0", "NaN", 1);
        assert!(matches!(ModelArtifact::parse(text.as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let a = export_model(&stump_ensemble(), metadata(Target::Active)).unwrap();
        let text = a.to_canonical_string().replacen("{\n", "{\n  \"extra\": 1,\n", 1);
        assert!(ModelArtifact::parse(text.as_bytes()).is_err());
    }

    #[test]
    fn invalid_utf8_is_a_parse_error() {
        assert!(matches!(
            ModelArtifact::parse(&[b'{', 0xff, b'}']),
            Err(Error::Parse { offset: 1, .. })
        ));
    }
}
