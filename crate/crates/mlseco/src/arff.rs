//! ARFF reader and writer (dense and sparse row syntax).
//!
//! Supports numeric and nominal attributes, `%` comment lines,
//! case-insensitive keywords, quoted names and values, and `?` for missing
//! feature values. Label attributes are identified by name, must be nominal
//! over {0, 1} (either declaration order), and are split out of the
//! attribute list into the dataset's label matrix. Missing label values are
//! rejected.

use std::collections::HashMap;

use crate::dataset::{
    AttributeKind, AttributeSpec, Instance, LabelMatrix, MultiLabelDataset, Value,
};
use crate::error::{Error, Result};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Arff {
        line,
        message: message.into(),
    }
}

/// Split a line into comma-separated fields, honoring quotes and backslash
/// escapes. Fields are trimmed and unquoted.
fn split_fields(line: &str, lineno: usize) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut chars = line.chars().peekable();
    let mut quote: Option<char> = None;
    while let Some(ch) = chars.next() {
        match quote {
            Some(q) => {
                if ch == '\\' {
                    match chars.next() {
                        Some(esc) => current.push(esc),
                        None => return Err(err(lineno, "dangling escape at end of line")),
                    }
                } else if ch == q {
                    quote = None;
                } else {
                    current.push(ch);
                }
            }
            None => match ch {
                '\'' | '"' => quote = Some(ch),
                ',' => {
                    fields.push(current.trim().to_string());
                    current = String::new();
                }
                _ => current.push(ch),
            },
        }
    }
    if quote.is_some() {
        return Err(err(lineno, "unterminated quote"));
    }
    fields.push(current.trim().to_string());
    Ok(fields)
}

/// Take one token (possibly quoted) off the front of `rest`; returns the
/// token and the remainder.
fn take_token(rest: &str, lineno: usize) -> Result<(String, &str)> {
    let rest = rest.trim_start();
    let mut chars = rest.char_indices();
    match chars.next() {
        Some((_, q @ ('\'' | '"'))) => {
            let mut token = String::new();
            let mut escaped = false;
            for (i, ch) in chars {
                if escaped {
                    token.push(ch);
                    escaped = false;
                } else if ch == '\\' {
                    escaped = true;
                } else if ch == q {
                    return Ok((token, &rest[i + ch.len_utf8()..]));
                } else {
                    token.push(ch);
                }
            }
            Err(err(lineno, "unterminated quote"))
        }
        Some(_) => {
            let end = rest
                .char_indices()
                .find(|&(_, c)| c.is_whitespace())
                .map_or(rest.len(), |(i, _)| i);
            Ok((rest[..end].to_string(), &rest[end..]))
        }
        None => Err(err(lineno, "expected a token")),
    }
}

fn parse_attribute_decl(rest: &str, lineno: usize) -> Result<AttributeSpec> {
    let (name, remainder) = take_token(rest, lineno)?;
    if name.is_empty() {
        return Err(err(lineno, "empty attribute name"));
    }
    let type_part = remainder.trim();
    if type_part.is_empty() {
        return Err(err(lineno, format!("attribute {name:?} has no type")));
    }
    if let Some(stripped) = type_part.strip_prefix('{') {
        let inner = stripped
            .strip_suffix('}')
            .ok_or_else(|| err(lineno, "nominal value list missing closing '}'"))?;
        let values = split_fields(inner, lineno)?;
        if values.is_empty() || values.iter().any(|v| v.is_empty()) {
            return Err(err(lineno, format!("attribute {name:?} has an empty nominal value")));
        }
        let mut seen = std::collections::HashSet::new();
        for v in &values {
            if !seen.insert(v.clone()) {
                return Err(err(
                    lineno,
                    format!("attribute {name:?} repeats nominal value {v:?}"),
                ));
            }
        }
        return Ok(AttributeSpec::nominal(name, values));
    }
    match type_part.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(AttributeSpec::numeric(name)),
        other => Err(err(
            lineno,
            format!("unsupported attribute type {other:?} for {name:?}"),
        )),
    }
}

enum RawValue {
    Present(String),
    Missing,
}

fn to_raw(field: &str) -> RawValue {
    if field == "?" {
        RawValue::Missing
    } else {
        RawValue::Present(field.to_string())
    }
}

/// Default value of an attribute for entries omitted from a sparse row:
/// 0 for numeric attributes, the first declared value for nominal ones.
fn sparse_default(attr: &AttributeSpec) -> RawValue {
    match &attr.kind {
        AttributeKind::Numeric => RawValue::Present("0".to_string()),
        AttributeKind::Nominal(values) => RawValue::Present(values[0].clone()),
    }
}

fn parse_data_row(line: &str, attrs: &[AttributeSpec], lineno: usize) -> Result<Vec<RawValue>> {
    let trimmed = line.trim();
    if let Some(inner) = trimmed.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| err(lineno, "sparse row missing closing '}'"))?;
        let mut row: Vec<RawValue> = attrs.iter().map(sparse_default).collect();
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(row);
        }
        for entry in split_fields(inner, lineno)? {
            let (idx_tok, value_part) = take_token(&entry, lineno)?;
            let idx: usize = idx_tok
                .parse()
                .map_err(|_| err(lineno, format!("bad sparse index {idx_tok:?}")))?;
            if idx >= attrs.len() {
                return Err(err(
                    lineno,
                    format!("sparse index {idx} out of range (have {} attributes)", attrs.len()),
                ));
            }
            let (value, leftover) = take_token(value_part, lineno)?;
            if !leftover.trim().is_empty() {
                return Err(err(lineno, format!("trailing content in sparse entry {entry:?}")));
            }
            row[idx] = to_raw(&value);
        }
        Ok(row)
    } else {
        let fields = split_fields(trimmed, lineno)?;
        if fields.len() != attrs.len() {
            return Err(err(
                lineno,
                format!("row has {} values, expected {}", fields.len(), attrs.len()),
            ));
        }
        Ok(fields.iter().map(|f| to_raw(f)).collect())
    }
}

/// Parse a Mulan-style ARFF document. `label_names` selects which declared
/// attributes form the label matrix; all remaining attributes become
/// features in declaration order.
pub fn parse_arff(text: &str, label_names: &[String]) -> Result<MultiLabelDataset> {
    let mut relation = String::new();
    let mut attrs: Vec<AttributeSpec> = Vec::new();
    let mut data_rows: Vec<(usize, Vec<RawValue>)> = Vec::new();
    let mut in_data = false;

    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                let rest = &line["@relation".len()..];
                relation = take_token(rest, lineno).map(|(t, _)| t).unwrap_or_default();
            } else if lower.starts_with("@attribute") {
                attrs.push(parse_attribute_decl(&line["@attribute".len()..], lineno)?);
            } else if lower.starts_with("@data") {
                in_data = true;
            } else {
                return Err(err(lineno, format!("unexpected header line {line:?}")));
            }
        } else {
            data_rows.push((lineno, parse_data_row(line, &attrs, lineno)?));
        }
    }

    if !in_data {
        return Err(err(text.lines().count(), "missing @data section"));
    }

    // Work out which declared attributes are labels. Position is inferred
    // from the names, not from where they sit in the declaration list.
    let mut name_to_index: HashMap<&str, usize> = HashMap::new();
    for (idx, a) in attrs.iter().enumerate() {
        if name_to_index.insert(a.name.as_str(), idx).is_some() {
            return Err(err(0, format!("duplicate attribute name {:?}", a.name)));
        }
    }
    let mut label_cols: Vec<usize> = Vec::with_capacity(label_names.len());
    for name in label_names {
        let idx = *name_to_index
            .get(name.as_str())
            .ok_or_else(|| err(0, format!("label {name:?} is not a declared attribute")))?;
        match &attrs[idx].kind {
            AttributeKind::Nominal(values) => {
                let mut sorted = values.clone();
                sorted.sort();
                if sorted != ["0", "1"] {
                    return Err(err(
                        0,
                        format!("label {name:?} must be nominal over {{0,1}}, got {values:?}"),
                    ));
                }
            }
            AttributeKind::Numeric => {
                return Err(err(0, format!("label {name:?} must be nominal over {{0,1}}")))
            }
        }
        label_cols.push(idx);
    }
    let is_label: Vec<bool> = {
        let mut v = vec![false; attrs.len()];
        for &c in &label_cols {
            v[c] = true;
        }
        v
    };

    let feature_attrs: Vec<AttributeSpec> = attrs
        .iter()
        .zip(&is_label)
        .filter(|(_, &lab)| !lab)
        .map(|(a, _)| a.clone())
        .collect();

    let mut instances = Vec::with_capacity(data_rows.len());
    let mut label_bits: Vec<Vec<u8>> = Vec::with_capacity(data_rows.len());
    for (lineno, row) in &data_rows {
        let mut values = Vec::with_capacity(feature_attrs.len());
        let mut bits = vec![0u8; label_cols.len()];
        for (col, raw) in row.iter().enumerate() {
            if is_label[col] {
                continue;
            }
            let value = match raw {
                RawValue::Missing => Value::Missing,
                RawValue::Present(s) => match &attrs[col].kind {
                    AttributeKind::Numeric => Value::Numeric(s.parse::<f64>().map_err(|_| {
                        err(*lineno, format!("bad numeric value {s:?} for {:?}", attrs[col].name))
                    })?),
                    AttributeKind::Nominal(vals) => {
                        let idx = vals.iter().position(|v| v == s).ok_or_else(|| {
                            err(
                                *lineno,
                                format!("value {s:?} not in declared list for {:?}", attrs[col].name),
                            )
                        })?;
                        Value::Nominal(idx as u32)
                    }
                },
            };
            values.push(value);
        }
        for (j, &col) in label_cols.iter().enumerate() {
            match &row[col] {
                RawValue::Missing => {
                    return Err(err(
                        *lineno,
                        format!("label {:?} has a missing value; labels must be fully observed",
                            attrs[col].name),
                    ))
                }
                RawValue::Present(s) => {
                    bits[j] = match s.as_str() {
                        "0" => 0,
                        "1" => 1,
                        other => {
                            return Err(err(
                                *lineno,
                                format!("label {:?} has non-binary value {other:?}", attrs[col].name),
                            ))
                        }
                    };
                }
            }
        }
        instances.push(Instance { values });
        label_bits.push(bits);
    }

    let labels = if instances.is_empty() {
        LabelMatrix::zeros(0, label_cols.len())
    } else {
        LabelMatrix::from_rows(&label_bits)
    };
    MultiLabelDataset::new(relation, feature_attrs, instances, labels, label_names.to_vec())
}

fn quote_if_needed(s: &str) -> String {
    let needs = s.is_empty()
        || s.contains(|c: char| {
            c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%')
        });
    if needs {
        let escaped = s.replace('\\', "\\\\").replace('\'', "\\'");
        format!("'{escaped}'")
    } else {
        s.to_string()
    }
}

fn format_value(attr: &AttributeSpec, value: &Value) -> String {
    match (value, &attr.kind) {
        (Value::Missing, _) => "?".to_string(),
        (Value::Numeric(v), _) => format!("{v}"),
        (Value::Nominal(i), AttributeKind::Nominal(vals)) => {
            quote_if_needed(&vals[*i as usize])
        }
        (Value::Nominal(i), AttributeKind::Numeric) => format!("{i}"),
    }
}

/// Render a dataset back to dense ARFF. Feature attributes come first in
/// their original order, label attributes last as nominal {0,1}.
pub fn write_arff(ds: &MultiLabelDataset) -> String {
    let mut out = String::new();
    out.push_str(&format!("@relation {}\n\n", quote_if_needed(&ds.relation)));
    for attr in &ds.attributes {
        match &attr.kind {
            AttributeKind::Numeric => {
                out.push_str(&format!("@attribute {} numeric\n", quote_if_needed(&attr.name)));
            }
            AttributeKind::Nominal(values) => {
                let list: Vec<String> = values.iter().map(|v| quote_if_needed(v)).collect();
                out.push_str(&format!(
                    "@attribute {} {{{}}}\n",
                    quote_if_needed(&attr.name),
                    list.join(",")
                ));
            }
        }
    }
    for name in &ds.label_names {
        out.push_str(&format!("@attribute {} {{0,1}}\n", quote_if_needed(name)));
    }
    out.push_str("\n@data\n");
    for (i, inst) in ds.instances.iter().enumerate() {
        let mut fields: Vec<String> = inst
            .values
            .iter()
            .zip(&ds.attributes)
            .map(|(v, a)| format_value(a, v))
            .collect();
        for c in 0..ds.num_labels() {
            fields.push(ds.labels.get(i, c).to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
% a comment
@RELATION tiny

@ATTRIBUTE x numeric
@attribute color {red,green,blue}
@attribute L1 {0,1}
@attribute L2 {1,0}

@DATA
1.5,red,1,0
2.5,green,0,1
3.5,?,1,1
";

    fn labels() -> Vec<String> {
        vec!["L1".to_string(), "L2".to_string()]
    }

    #[test]
    fn parses_dense_structure() {
        let ds = parse_arff(TINY, &labels()).unwrap();
        assert_eq!(ds.num_attributes(), 2);
        assert_eq!(ds.num_labels(), 2);
        assert_eq!(ds.num_instances(), 3);
        assert_eq!(ds.relation, "tiny");
        assert_eq!(ds.instances[0].values[0], Value::Numeric(1.5));
        assert_eq!(ds.instances[1].values[1], Value::Nominal(1));
        assert!(ds.instances[2].values[1].is_missing());
        assert_eq!(ds.labels.row(0), vec![1, 0]);
        assert_eq!(ds.labels.row(2), vec![1, 1]);
    }

    #[test]
    fn sparse_rows_equal_dense_rows() {
        let dense = "\
@relation s
@attribute a numeric
@attribute b numeric
@attribute c {x,y}
@attribute L {0,1}
@data
2.5,0,x,1
0,1,y,0
";
        let sparse = "\
@relation s
@attribute a numeric
@attribute b numeric
@attribute c {x,y}
@attribute L {0,1}
@data
{0 2.5, 3 1}
{1 1, 2 y}
";
        let lab = vec!["L".to_string()];
        let d = parse_arff(dense, &lab).unwrap();
        let s = parse_arff(sparse, &lab).unwrap();
        assert_eq!(d, s);
    }

    #[test]
    fn missing_label_is_an_error() {
        let text = "\
@relation s
@attribute a numeric
@attribute L {0,1}
@data
1.0,?
";
        let e = parse_arff(text, &["L".to_string()]).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 5"), "unexpected message: {msg}");
    }

    #[test]
    fn unknown_label_name_is_an_error() {
        assert!(parse_arff(TINY, &["nope".to_string()]).is_err());
    }

    #[test]
    fn non_binary_label_attribute_is_an_error() {
        let text = "\
@relation s
@attribute a numeric
@attribute L {yes,no}
@data
1.0,yes
";
        assert!(parse_arff(text, &["L".to_string()]).is_err());
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let text = "@relation r\n@attribute a numeric\n@attribute L {0,1}\n@data\n1.0\n";
        let e = parse_arff(text, &["L".to_string()]).unwrap_err();
        assert!(e.to_string().contains("line 5"));
    }

    #[test]
    fn labels_may_sit_anywhere_in_declaration_order() {
        let text = "\
@relation s
@attribute L {0,1}
@attribute a numeric
@data
1,7.5
";
        let ds = parse_arff(text, &["L".to_string()]).unwrap();
        assert_eq!(ds.num_attributes(), 1);
        assert_eq!(ds.attributes[0].name, "a");
        assert_eq!(ds.labels.row(0), vec![1]);
    }

    #[test]
    fn round_trip_dense() {
        let ds = parse_arff(TINY, &labels()).unwrap();
        let rendered = write_arff(&ds);
        let again = parse_arff(&rendered, &labels()).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn quoted_values_with_spaces() {
        let text = "\
@relation 'my data'
@attribute 'the attr' {'a value','другое'}
@attribute L {0,1}
@data
'a value',1
";
        let ds = parse_arff(text, &["L".to_string()]).unwrap();
        assert_eq!(ds.relation, "my data");
        assert_eq!(ds.attributes[0].name, "the attr");
        assert_eq!(ds.instances[0].values[0], Value::Nominal(0));
        let again = parse_arff(&write_arff(&ds), &["L".to_string()]).unwrap();
        assert_eq!(ds, again);
    }
}
