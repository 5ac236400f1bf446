//! Minimal JSON Schema checker for the subset used by the shipped schema
//! files: type, const, enum, properties, required, additionalProperties,
//! items, minimum.

use serde_json::Value;

pub fn validate(schema: &Value, instance: &Value, path: &str) -> Result<(), String> {
    if let Some(expected) = schema.get("const") {
        if instance != expected {
            return Err(format!("{path}: expected const {expected}, got {instance}"));
        }
    }

    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(instance) {
            return Err(format!("{path}: {instance} not among {options:?}"));
        }
    }

    if let Some(ty) = schema.get("type") {
        let allowed: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => return Err(format!("{path}: malformed type keyword")),
        };
        let actual = match instance {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) => {
                if allowed.contains(&"integer") && (n.is_i64() || n.is_u64()) {
                    "integer"
                } else {
                    "number"
                }
            }
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        if !allowed.contains(&actual) {
            return Err(format!("{path}: type {actual} not in {allowed:?}"));
        }
    }

    if let Some(minimum) = schema.get("minimum").and_then(Value::as_f64) {
        if let Some(x) = instance.as_f64() {
            if x < minimum {
                return Err(format!("{path}: {x} below minimum {minimum}"));
            }
        }
    }

    if let Value::Object(fields) = instance {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !fields.contains_key(key) {
                    return Err(format!("{path}: missing required field `{key}`"));
                }
            }
        }
        let properties = schema.get("properties").and_then(Value::as_object);
        if let Some(props) = properties {
            for (key, sub) in props {
                if let Some(value) = fields.get(key) {
                    validate(sub, value, &format!("{path}/{key}"))?;
                }
            }
        }
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in fields.keys() {
                if properties.is_none_or(|props| !props.contains_key(key)) {
                    return Err(format!("{path}: unexpected field `{key}`"));
                }
            }
        }
    }

    if let (Value::Array(items), Some(item_schema)) = (instance, schema.get("items")) {
        for (k, item) in items.iter().enumerate() {
            validate(item_schema, item, &format!("{path}[{k}]"))?;
        }
    }

    Ok(())
}

pub fn assert_valid(schema_path: &str, instance: &Value) {
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(schema_path).unwrap_or_else(|e| panic!("read {schema_path}: {e}")),
    )
    .unwrap();
    if let Err(message) = validate(&schema, instance, "$") {
        panic!("instance violates {schema_path}: {message}");
    }
}
