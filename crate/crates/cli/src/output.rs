//! JSON and CSV writers.
//!
//! JSON documents have sorted keys and every float written with 17
//! significant digits in exponent form, so equal answers give equal bytes.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};
use subseq_core::{Answer, Sequence};

struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Compact JSON followed by a newline.
pub fn to_json(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Where a query came from.
#[derive(Clone, Debug)]
pub struct QueryOrigin {
    pub id: String,
    pub offset: usize,
    pub len: usize,
}

impl QueryOrigin {
    pub fn of(q: &Sequence) -> Self {
        QueryOrigin { id: q.root_id().to_owned(), offset: q.offset(), len: q.len() }
    }

    fn json(&self) -> Value {
        json!({ "id": self.id, "offset": self.offset, "len": self.len })
    }
}

fn matches_json(answer: &Answer) -> Value {
    answer
        .matches
        .iter()
        .map(|m| json!({ "pid": m.pid, "start": m.start, "distance": m.distance }))
        .collect()
}

pub fn range_document(origin: &QueryOrigin, eps: f64, answer: &Answer) -> Value {
    json!({
        "query": origin.json(),
        "eps": eps,
        "exact": answer.exact,
        "matches": matches_json(answer),
    })
}

pub fn knn_document(origin: &QueryOrigin, k: usize, mult: usize, answer: &Answer) -> Value {
    json!({
        "query": origin.json(),
        "k": k,
        "mult": mult,
        "exact": answer.exact,
        "matches": matches_json(answer),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// One column per sequence (one per component for vector sequences), one
/// row per position; the first column is the position.
pub fn write_csv(mut w: impl Write, columns: &[(String, Sequence)]) -> io::Result<()> {
    let mut header = vec!["t".to_owned()];
    for (name, s) in columns {
        match s.kind().dim() {
            1 => header.push(csv_field(name)),
            d => header.extend((0..d).map(|c| csv_field(&format!("{name}.{c}")))),
        }
    }
    writeln!(w, "{}", header.join(","))?;
    let rows = columns.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    for t in 0..rows {
        let mut row = vec![t.to_string()];
        for (_, s) in columns {
            let d = s.kind().dim();
            if t < s.len() {
                row.extend(s.component(t).iter().map(|x| format!("{x:?}")));
            } else {
                row.extend(std::iter::repeat_n(String::new(), d));
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
