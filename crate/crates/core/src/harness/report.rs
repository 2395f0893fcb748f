use serde_json::{json, Value};

use super::evaluate::{EvalReport, ExperimentConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str =
    "procedure,k,config_hash,R,pcs_hat,pcs_se,pgs_hat,pgs_se,eoc_hat,eoc_se,mean_N,mean_N_se,runtime_s";

impl EvalReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.procedure,
            self.k,
            self.config_hash,
            self.replications,
            self.pcs_hat,
            self.pcs_se,
            self.pgs_hat,
            self.pgs_se,
            self.eoc_hat,
            self.eoc_se,
            self.mean_n,
            self.mean_n_se,
            self.runtime_s
        )
    }

    /// JSON document with the full configuration and the schema it obeys.
    pub fn to_json(&self, config: &ExperimentConfig) -> Value {
        json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "schema": report_schema(),
            "config": config,
            "report": self,
        })
    }
}

/// JSON Schema of the `report` object.
pub fn report_schema() -> Value {
    let num = json!({"type": "number"});
    let prob = json!({"type": "number", "minimum": 0.0, "maximum": 1.0});
    let nonneg = json!({"type": "number", "minimum": 0.0});
    json!({
        "type": "object",
        "required": [
            "procedure", "k", "config_hash", "replications", "pcs_hat", "pcs_se",
            "pcs_wilson", "pgs_hat", "pgs_se", "eoc_hat", "eoc_se", "mean_n",
            "mean_n_se", "aborted", "runtime_s"
        ],
        "properties": {
            "procedure": {"type": "string"},
            "k": {"type": "integer", "minimum": 2},
            "config_hash": {"type": "string"},
            "replications": {"type": "integer", "minimum": 1},
            "pcs_hat": prob,
            "pcs_se": nonneg,
            "pcs_wilson": {"type": "array", "items": prob},
            "pgs_hat": prob,
            "pgs_se": nonneg,
            "eoc_hat": nonneg,
            "eoc_se": nonneg,
            "mean_n": nonneg,
            "mean_n_se": nonneg,
            "aborted": {"type": "integer", "minimum": 0},
            "runtime_s": num,
        }
    })
}

/// Checks `value` against the subset of JSON Schema used by
/// [`report_schema`]: `type`, `required`, `properties`, `items`, `minimum`
/// and `maximum`. Returns the path of the first violation.
pub fn validate_json(value: &Value, schema: &Value) -> Result<(), String> {
    validate_at(value, schema, "$")
}

fn validate_at(v: &Value, schema: &Value, path: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => return Err(format!("{path}: unsupported schema type {t}")),
        };
        if !ok {
            return Err(format!("{path}: expected {t}"));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(lo) = schema.get("minimum").and_then(Value::as_f64) {
            if x < lo {
                return Err(format!("{path}: {x} below minimum {lo}"));
            }
        }
        if let Some(hi) = schema.get("maximum").and_then(Value::as_f64) {
            if x > hi {
                return Err(format!("{path}: {x} above maximum {hi}"));
            }
        }
    }
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        for key in req.iter().filter_map(Value::as_str) {
            if v.get(key).is_none() {
                return Err(format!("{path}: missing {key}"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (schema.get("properties").and_then(Value::as_object), v.as_object()) {
        for (key, sub) in props {
            if let Some(child) = obj.get(key) {
                validate_at(child, sub, &format!("{path}.{key}"))?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, child) in arr.iter().enumerate() {
            validate_at(child, items, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}
