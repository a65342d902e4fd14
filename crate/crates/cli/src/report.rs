//! Result documents. JSON documents carry `command`, `seed`, `params` and
//! `result`; CSV documents start with `# key=value` header lines for the
//! same fields.

use ecd_core::experiments::Table;
use serde_json::{json, Map, Value};

use crate::args::Format;

pub enum Body {
    Record(Map<String, Value>),
    Table(Table),
}

impl Body {
    fn default_format(&self) -> Format {
        match self {
            Body::Record(_) => Format::Json,
            Body::Table(_) => Format::Csv,
        }
    }
}

pub struct Document {
    pub command: String,
    pub seed: u64,
    pub params: Value,
    pub body: Body,
}

impl Document {
    pub fn render(&self, format: Option<Format>) -> String {
        match format.unwrap_or_else(|| self.body.default_format()) {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_json(&self) -> String {
        let result = match &self.body {
            Body::Record(m) => Value::Object(m.clone()),
            Body::Table(t) => json!({ "columns": t.columns, "rows": t.rows }),
        };
        let doc = json!({
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "result": result,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("plain data always serializes");
        out.push('\n');
        out
    }

    fn render_csv(&self) -> String {
        let mut out = format!("# command={}\n# seed={}\n", self.command, self.seed);
        if let Value::Object(params) = &self.params {
            for (k, v) in params {
                match v {
                    Value::Null => {}
                    Value::String(s) => out.push_str(&format!("# {k}={s}\n")),
                    other => out.push_str(&format!("# {k}={other}\n")),
                }
            }
        }
        match &self.body {
            Body::Table(t) => out.push_str(&t.to_csv()),
            Body::Record(m) => {
                let scalars: Vec<(&String, &Value)> =
                    m.iter().filter(|(_, v)| !v.is_array() && !v.is_object()).collect();
                let keys: Vec<&str> = scalars.iter().map(|(k, _)| k.as_str()).collect();
                let values: Vec<String> = scalars.iter().map(|(_, v)| v.to_string()).collect();
                out.push_str(&keys.join(","));
                out.push('\n');
                out.push_str(&values.join(","));
                out.push('\n');
            }
        }
        out
    }
}
