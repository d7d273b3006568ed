//! JSON network documents and canonical report output.
//!
//! Documents are parsed in two passes: `serde_json` for syntax (line and
//! column of the first error), then a schema walk that reports the path of
//! the first offending field. Serialization is canonical: keys sorted, no
//! whitespace, integers unquoted, so `serialize(parse(text)) == text` for
//! every canonical `text`.
//!
//! ```text
//! {"destinations":["D"],"edges":[{"from":"S","matrix":[[1]],"to":"D"}],
//!  "field":{"p":2,"q":1},"model":"linear","nodes":["S","D"],"source":"S"}
//! ```
//!
//! General documents replace `field` and the edge matrices with
//! `"alphabets":{"S":2,…}` and `"functions":{"D":{"inputs":[…],"outputs":k,"table":[…]}}`.
//! Optional keys: `name`, `comment`, `unbounded` (`[{"delay","from","to"}]`).

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::network::{
    FunctionDescription, GainDescription, ModelDescription, NetworkDescription, RelayNetwork,
    UnboundedDescription,
};

/// Decimal places for bit values in text and JSON reports.
pub const BIT_DECIMALS: usize = 9;

pub fn parse(text: &str) -> Result<RelayNetwork> {
    parse_description(text)?.build()
}

pub fn parse_description(text: &str) -> Result<NetworkDescription> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Schema::document(&value)
}

pub fn serialize(net: &RelayNetwork) -> String {
    serialize_description(&net.to_description())
}

pub fn serialize_description(d: &NetworkDescription) -> String {
    let mut doc = Map::new();
    let strings = |v: &[String]| Value::from(v.to_vec());
    if let Some(name) = &d.name {
        doc.insert("name".into(), name.as_str().into());
    }
    if let Some(comment) = &d.comment {
        doc.insert("comment".into(), comment.as_str().into());
    }
    doc.insert("nodes".into(), strings(&d.nodes));
    doc.insert("source".into(), d.source.as_str().into());
    doc.insert("destinations".into(), strings(&d.destinations));
    match &d.model {
        ModelDescription::Linear { prime, dim, edges } => {
            doc.insert("model".into(), "linear".into());
            doc.insert("field".into(), serde_json::json!({"p": prime, "q": dim}));
            let edges = edges
                .iter()
                .map(|g| serde_json::json!({"from": g.from, "to": g.to, "matrix": g.matrix}))
                .collect::<Vec<_>>();
            doc.insert("edges".into(), edges.into());
        }
        ModelDescription::General {
            alphabets,
            edges,
            functions,
        } => {
            doc.insert("model".into(), "general".into());
            let alphabets: Map<String, Value> = alphabets
                .iter()
                .map(|(n, a)| (n.clone(), (*a).into()))
                .collect();
            doc.insert("alphabets".into(), alphabets.into());
            let edges = edges
                .iter()
                .map(|(a, b)| serde_json::json!({"from": a, "to": b}))
                .collect::<Vec<_>>();
            doc.insert("edges".into(), edges.into());
            let functions: Map<String, Value> = functions
                .iter()
                .map(|(n, f)| {
                    let mut m = Map::new();
                    m.insert("inputs".into(), strings(&f.inputs));
                    if let Some(o) = f.outputs {
                        m.insert("outputs".into(), o.into());
                    }
                    m.insert("table".into(), f.table.clone().into());
                    (n.clone(), m.into())
                })
                .collect();
            doc.insert("functions".into(), functions.into());
        }
    }
    if !d.unbounded.is_empty() {
        let links = d
            .unbounded
            .iter()
            .map(|u| serde_json::json!({"from": u.from, "to": u.to, "delay": u.delay}))
            .collect::<Vec<_>>();
        doc.insert("unbounded".into(), links.into());
    }
    Value::Object(doc).to_string()
}

/// Canonical JSON for a report: sorted keys, no whitespace, non-integer
/// numbers rounded to [`BIT_DECIMALS`] places.
pub fn canonical_json<T: Serialize>(report: &T) -> String {
    let mut v = serde_json::to_value(report).expect("reports serialize to JSON");
    round_floats(&mut v);
    v.to_string()
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.BIT_DECIMALS$}")
                .parse()
                .expect("formatted float");
            // -0.000000000 rounds to -0.0
            *v = serde_json::Number::from_f64(r + 0.0).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(m) => m.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Bit value with [`BIT_DECIMALS`] places.
pub fn format_bits(x: f64) -> String {
    let s = format!("{x:.BIT_DECIMALS$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_owned()
    } else {
        s
    }
}

struct Schema;

type Obj = Map<String, Value>;

fn err<T>(path: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::schema(path, message))
}

impl Schema {
    fn map<'v>(v: &'v Value, path: &str) -> Result<&'v Obj> {
        v.as_object()
            .map_or_else(|| err(path, "expected an object"), Ok)
    }

    fn object<'v>(v: &'v Value, path: &str, allowed: &[&str]) -> Result<&'v Obj> {
        let m = Self::map(v, path)?;
        if let Some(k) = m.keys().find(|k| !allowed.contains(&k.as_str())) {
            return err(&format!("{path}.{k}"), "unknown field");
        }
        Ok(m)
    }

    fn field<'v>(m: &'v Obj, path: &str, key: &str) -> Result<&'v Value> {
        m.get(key)
            .map_or_else(|| err(path, format!("missing field `{key}`")), Ok)
    }

    fn string(v: &Value, path: &str) -> Result<String> {
        v.as_str()
            .map(str::to_owned)
            .map_or_else(|| err(path, "expected a string"), Ok)
    }

    fn strings(v: &Value, path: &str) -> Result<Vec<String>> {
        Self::array(v, path)?
            .iter()
            .enumerate()
            .map(|(i, s)| Self::string(s, &format!("{path}[{i}]")))
            .collect()
    }

    fn array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
        v.as_array()
            .map_or_else(|| err(path, "expected an array"), Ok)
    }

    fn uint(v: &Value, path: &str) -> Result<u32> {
        match v.as_u64() {
            Some(x) => u32::try_from(x).or_else(|_| err(path, "integer too large")),
            None => err(path, "expected a non-negative integer"),
        }
    }

    fn document(v: &Value) -> Result<NetworkDescription> {
        const COMMON: [&str; 8] = [
            "model",
            "name",
            "comment",
            "nodes",
            "source",
            "destinations",
            "edges",
            "unbounded",
        ];
        let root = Self::map(v, "$")?;
        let model = Self::string(Self::field(root, "$", "model")?, "$.model")?;
        let allowed: Vec<&str> = match model.as_str() {
            "linear" => [&COMMON[..], &["field"]].concat(),
            "general" => [&COMMON[..], &["alphabets", "functions"]].concat(),
            _ => return err("$.model", "expected \"linear\" or \"general\""),
        };
        let root = Self::object(v, "$", &allowed)?;
        let opt = |key: &str| -> Result<Option<String>> {
            root.get(key)
                .map(|s| Self::string(s, &format!("$.{key}")))
                .transpose()
        };
        let nodes = Self::strings(Self::field(root, "$", "nodes")?, "$.nodes")?;
        let source = Self::string(Self::field(root, "$", "source")?, "$.source")?;
        let destinations =
            Self::strings(Self::field(root, "$", "destinations")?, "$.destinations")?;
        let edges = Self::array(Self::field(root, "$", "edges")?, "$.edges")?;
        let model = if model == "linear" {
            Self::linear(root, edges)?
        } else {
            Self::general(root, edges)?
        };
        let unbounded = match root.get("unbounded") {
            None => Vec::new(),
            Some(u) => Self::array(u, "$.unbounded")?
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let path = format!("$.unbounded[{i}]");
                    let m = Self::object(l, &path, &["from", "to", "delay"])?;
                    Ok(UnboundedDescription {
                        from: Self::string(
                            Self::field(m, &path, "from")?,
                            &format!("{path}.from"),
                        )?,
                        to: Self::string(Self::field(m, &path, "to")?, &format!("{path}.to"))?,
                        delay: Self::uint(
                            Self::field(m, &path, "delay")?,
                            &format!("{path}.delay"),
                        )?,
                    })
                })
                .collect::<Result<_>>()?,
        };
        Ok(NetworkDescription {
            name: opt("name")?,
            comment: opt("comment")?,
            nodes,
            source,
            destinations,
            model,
            unbounded,
        })
    }

    fn linear(root: &Obj, edges: &[Value]) -> Result<ModelDescription> {
        let field = Self::object(Self::field(root, "$", "field")?, "$.field", &["p", "q"])?;
        let prime = Self::uint(Self::field(field, "$.field", "p")?, "$.field.p")?;
        let dim = Self::uint(Self::field(field, "$.field", "q")?, "$.field.q")? as usize;
        let edges = edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let path = format!("$.edges[{i}]");
                let m = Self::object(e, &path, &["from", "to", "matrix"])?;
                let mpath = format!("{path}.matrix");
                let rows = Self::array(Self::field(m, &path, "matrix")?, &mpath)?;
                if rows.len() != dim {
                    return err(&mpath, format!("matrix must have {dim} rows"));
                }
                let matrix = rows
                    .iter()
                    .enumerate()
                    .map(|(r, row)| {
                        let rpath = format!("{mpath}[{r}]");
                        let row = Self::array(row, &rpath)?;
                        if row.len() != dim {
                            return err(&rpath, format!("row must have {dim} entries"));
                        }
                        row.iter()
                            .enumerate()
                            .map(|(c, x)| {
                                let epath = format!("{rpath}[{c}]");
                                let x = Self::uint(x, &epath)?;
                                if x >= prime {
                                    return err(&epath, "entry out of field range");
                                }
                                Ok(x)
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()?;
                Ok(GainDescription {
                    from: Self::string(Self::field(m, &path, "from")?, &format!("{path}.from"))?,
                    to: Self::string(Self::field(m, &path, "to")?, &format!("{path}.to"))?,
                    matrix,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ModelDescription::Linear { prime, dim, edges })
    }

    fn general(root: &Obj, edges: &[Value]) -> Result<ModelDescription> {
        let alphabets: Vec<(String, u32)> =
            Self::map(Self::field(root, "$", "alphabets")?, "$.alphabets")?
                .iter()
                .map(|(k, v)| Ok((k.clone(), Self::uint(v, &format!("$.alphabets.{k}"))?)))
                .collect::<Result<_>>()?;
        let edges = edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let path = format!("$.edges[{i}]");
                let m = Self::object(e, &path, &["from", "to"])?;
                Ok((
                    Self::string(Self::field(m, &path, "from")?, &format!("{path}.from"))?,
                    Self::string(Self::field(m, &path, "to")?, &format!("{path}.to"))?,
                ))
            })
            .collect::<Result<_>>()?;
        let size = |name: &str| alphabets.iter().find(|(n, _)| n == name).map(|&(_, a)| a);
        let functions = Self::map(Self::field(root, "$", "functions")?, "$.functions")?
            .iter()
            .map(|(name, f)| {
                let path = format!("$.functions.{name}");
                let m = Self::object(f, &path, &["inputs", "outputs", "table"])?;
                let inputs =
                    Self::strings(Self::field(m, &path, "inputs")?, &format!("{path}.inputs"))?;
                let outputs = m
                    .get("outputs")
                    .map(|o| Self::uint(o, &format!("{path}.outputs")))
                    .transpose()?;
                let tpath = format!("{path}.table");
                let table: Vec<u32> = Self::array(Self::field(m, &path, "table")?, &tpath)?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| Self::uint(x, &format!("{tpath}[{i}]")))
                    .collect::<Result<_>>()?;
                let rows = inputs
                    .iter()
                    .try_fold(1u64, |acc, i| size(i).map(|a| acc.saturating_mul(a as u64)));
                if let Some(rows) = rows {
                    if table.len() as u64 != rows {
                        return err(
                            &tpath,
                            format!(
                                "function table of node `{name}` has {} entries, expected {rows}",
                                table.len()
                            ),
                        );
                    }
                }
                if let Some(o) = outputs {
                    if let Some(i) = table.iter().position(|&y| y >= o) {
                        return err(
                            &format!("{tpath}[{i}]"),
                            format!("output of node `{name}` out of range"),
                        );
                    }
                }
                Ok((
                    name.clone(),
                    FunctionDescription {
                        inputs,
                        outputs,
                        table,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        Ok(ModelDescription::General {
            alphabets,
            edges,
            functions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::unfolding::unfold;

    const MINIMAL: &str = r#"{"destinations":["D"],"edges":[{"from":"S","matrix":[[1]],"to":"D"}],"field":{"p":2,"q":1},"model":"linear","nodes":["S","D"],"source":"S"}"#;

    #[test]
    fn minimal_linear_document() {
        let net = parse(MINIMAL).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(serialize(&net), MINIMAL);
    }

    #[test]
    fn whitespace_is_not_canonical_but_parses() {
        let spaced = MINIMAL.replace(',', ",\n  ");
        assert_eq!(serialize(&parse(&spaced).unwrap()), MINIMAL);
    }

    #[test]
    fn entry_equal_to_prime_is_a_schema_error() {
        let bad = MINIMAL.replace("[[1]]", "[[2]]");
        match parse(&bad) {
            Err(Error::Schema { path, message }) => {
                assert_eq!(path, "$.edges[0].matrix[0][0]");
                assert_eq!(message, "entry out of field range");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_function_table_names_the_node() {
        let doc = r#"{"alphabets":{"A":2,"D":2,"S":2},"destinations":["D"],"edges":[{"from":"S","to":"D"},{"from":"A","to":"D"}],"functions":{"D":{"inputs":["S","A"],"table":[0,1,1]}},"model":"general","nodes":["S","A","D"],"source":"S"}"#;
        match parse(doc) {
            Err(Error::Schema { path, message }) => {
                assert_eq!(path, "$.functions.D.table");
                assert!(message.contains("`D`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let fixed = doc.replace("[0,1,1]", "[0,1,1,1]");
        assert!(parse(&fixed).is_ok());
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse("{\n  \"model\": linear\n}") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 12)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        let cases = [
            (MINIMAL.replace("\"linear\"", "\"affine\""), "$.model"),
            (MINIMAL.replace("\"source\"", "\"sauce\""), "$.sauce"),
            (MINIMAL.replace("[[1]]", "[[1,0]]"), "$.edges[0].matrix[0]"),
            (MINIMAL.replace("\"p\":2", "\"p\":-2"), "$.field.p"),
            ("[]".to_owned(), "$"),
        ];
        for (doc, expected) in cases {
            match parse(&doc) {
                Err(Error::Schema { path, .. }) => assert_eq!(path, expected, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
    }

    #[test]
    fn semantic_errors_delegate_to_validation() {
        let bad = MINIMAL.replace(r#""destinations":["D"]"#, r#""destinations":["S"]"#);
        assert!(matches!(parse(&bad), Err(Error::Invalid(_))));
    }

    #[test]
    fn catalog_round_trips() {
        for net in [
            catalog::diamond(),
            catalog::three_hop(3, 2),
            catalog::unequal_paths(),
            catalog::or_network(),
            unfold(&catalog::unequal_paths(), 2)
                .unwrap()
                .network()
                .clone(),
            unfold(&catalog::or_network(), 2).unwrap().network().clone(),
        ] {
            let text = serialize(&net);
            let back = parse(&text).unwrap();
            assert_eq!(back, net);
            assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn report_rounding() {
        #[derive(Serialize)]
        struct R {
            b: f64,
            a: u64,
            z: f64,
        }
        let s = canonical_json(&R {
            b: 0.8112781244591328,
            a: 3,
            z: -1e-12,
        });
        assert_eq!(s, r#"{"a":3,"b":0.811278124,"z":0.0}"#);
        assert_eq!(format_bits(2.0), "2.000000000");
        assert_eq!(format_bits(-1e-13), "0.000000000");
    }
}
